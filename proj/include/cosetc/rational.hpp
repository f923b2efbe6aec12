#pragma once

// Benois automata for rational subsets of free groups.  A ReducedNfa in
// normal form accepts exactly the freely reduced words of its subset, so
// language questions about the subset (emptiness, finiteness, inclusion,
// shortest element) become plain automaton questions.

#include <cstdint>
#include <optional>
#include <vector>

#include "cosetc/stallings.hpp"
#include "cosetc/words.hpp"

namespace cosetc {

struct RationalOptions {
    std::size_t state_cap = 200'000;
};

class ReducedNfa {
  public:
    // Raw automata; the language may contain unreduced words until
    // benois_reduce is applied.
    static ReducedNfa empty_language(int rank);
    static ReducedNfa single_word(int rank, const Word& w);

    // Accepts the (possibly unreduced) spellings of elements of the coset
    // prefix * P, from loops of the core graph.
    static ReducedNfa coset(const CoreGraph& p, const Word& prefix);

    // Double coset P1 * middle * P2.
    static ReducedNfa double_coset(const CoreGraph& p1, const Word& middle, const CoreGraph& p2);

    int rank() const { return rank_; }
    int state_count() const { return static_cast<int>(trans_.size()); }
    bool reduced_form() const { return reduced_; }

    // Saturate cancellations, then restrict to reduced runs: the result
    // accepts exactly the reduced words of the original subset.
    ReducedNfa benois_reduce(const RationalOptions& opts = {}) const;

    // Closed r-neighborhood of the subset in the word metric (right ball).
    ReducedNfa neighborhood(int r, const RationalOptions& opts = {}) const;

    // Both operands must be in reduced form.
    ReducedNfa intersect(const ReducedNfa& other, const RationalOptions& opts = {}) const;

    bool accepts(const Word& w) const;
    bool is_empty() const;
    bool is_infinite() const;

    // Length of a shortest accepted word; nullopt when the language is empty.
    std::optional<int> shortest_length() const;
    // Shortlex-least accepted word among those of minimal length.
    std::optional<Word> shortlex_least() const;

    // Language inclusion via antichain-pruned subset simulation.
    bool included_in(const ReducedNfa& other, const RationalOptions& opts = {}) const;

  private:
    ReducedNfa() = default;
    void trim();
    bool accepting_rec(int s) const;

    int rank_ = 0;
    int initial_ = 0;
    bool reduced_ = false;
    std::vector<char> accepting_;
    std::vector<std::vector<std::pair<Letter, int>>> trans_;
    std::vector<std::vector<int>> eps_;
};

// Exact infimum distance between two cosets of free-group subgroups:
// min length over P1 g1^-1 g2 P2.
int coset_distance_free(const CoreGraph& p1, const Word& g1, const CoreGraph& p2, const Word& g2,
                        const RationalOptions& opts = {});

// Simplex test of the tau-filtered complex: is the intersection of the
// closed tau-neighborhoods of the cosets infinite?
bool ktau_simplex_free(const std::vector<CoreGraph>& peripherals,
                       const std::vector<FreeCoset>& cosets, int tau,
                       const RationalOptions& opts = {});

// Are the two cosets within Hausdorff distance r of each other?
bool hausdorff_within_free(const CoreGraph& p1, const Word& g1, const CoreGraph& p2,
                           const Word& g2, int r, const RationalOptions& opts = {});

}  // namespace cosetc
