#pragma once

// Words over a signed generator alphabet, free reduction, normal forms for
// right-angled Artin groups, and parabolic support machinery.  Everything in
// this header is a pure function of immutable values.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cosetc/errors.hpp"

namespace cosetc {

// A letter is a signed generator: +(i+1) is generator i, -(i+1) its inverse.
using Letter = std::int32_t;

inline int gen_of(Letter l) { return (l > 0 ? l : -l) - 1; }
inline int sign_of(Letter l) { return l > 0 ? +1 : -1; }
inline Letter make_letter(int gen, int sign) {
    return sign > 0 ? Letter(gen + 1) : Letter(-(gen + 1));
}
inline Letter inverse(Letter l) { return -l; }

// Total order on letters used for all shortlex decisions: generator index
// first, positive before negative.
inline int letter_rank(Letter l) { return 2 * gen_of(l) + (l < 0 ? 1 : 0); }

struct Word {
    std::vector<Letter> letters;

    Word() = default;
    explicit Word(std::vector<Letter> ls) : letters(std::move(ls)) {}

    std::size_t size() const { return letters.size(); }
    bool empty() const { return letters.empty(); }
    bool operator==(const Word& o) const { return letters == o.letters; }
    bool operator!=(const Word& o) const { return !(*this == o); }

    Word inverse_word() const {
        Word w;
        w.letters.reserve(letters.size());
        for (auto it = letters.rbegin(); it != letters.rend(); ++it) w.letters.push_back(-*it);
        return w;
    }

    Word concat(const Word& o) const {
        Word w = *this;
        w.letters.insert(w.letters.end(), o.letters.begin(), o.letters.end());
        return w;
    }
};

bool shortlex_less(const Word& a, const Word& b);

// Defining graph of a RAAG: vertices are generators, an edge means the two
// generators commute.  A free group is the edgeless graph.
class DefiningGraph {
  public:
    DefiningGraph() = default;
    explicit DefiningGraph(int n_vertices);
    static DefiningGraph free_group(int rank) { return DefiningGraph(rank); }
    static DefiningGraph cycle(int n);

    int size() const { return n_; }
    void add_edge(int a, int b);
    bool adjacent(int a, int b) const;
    std::uint64_t link_mask(int v) const { return adj_[v]; }
    std::uint64_t star_mask(int v) const { return adj_[v] | (std::uint64_t{1} << v); }

    std::vector<int> link(int v) const;
    std::vector<int> star(int v) const;

    bool triangle_free() const;
    int min_valence() const;
    bool connected() const;
    bool edgeless() const;

  private:
    int n_ = 0;
    std::vector<std::uint64_t> adj_;  // bit w of adj_[v]: v,w commute
};

// Canonical word for a group element under a fixed normal-form discipline.
// Only the normalizing functions below produce these.
struct NormalForm {
    Word word;

    std::size_t length() const { return word.size(); }
    bool is_identity() const { return word.empty(); }
    bool operator==(const NormalForm& o) const { return word == o.word; }
    bool operator!=(const NormalForm& o) const { return !(o == *this); }
};

void check_word(const DefiningGraph& graph, const Word& w);

// Free reduction: cancel adjacent inverse pairs until none remain.
NormalForm free_reduce(const Word& w);

// Shortlex-least word equal to w in the RAAG of `graph` (free cancellation
// plus commutation of adjacent generators).  Idempotent and deterministic.
NormalForm nf_raag(const DefiningGraph& graph, const Word& w);

// Generator indices occurring in a normal form, as a bit mask and as a set.
std::uint64_t support_mask(const NormalForm& nf);
std::vector<int> support(const NormalForm& nf);

// Membership in the standard parabolic subgroup generated by `gens_mask`.
bool is_in_parabolic(const DefiningGraph& graph, const Word& g, std::uint64_t gens_mask);

// Factor g = head * tail with tail in the parabolic <S>, head the shortlex
// least minimal-length representative of the coset g<S>.
struct ParabolicSplit {
    NormalForm head;
    NormalForm tail;
};
ParabolicSplit strip_parabolic_tail(const DefiningGraph& graph, const Word& g, std::uint64_t s_mask);

// Symmetric variant stripping a parabolic prefix: g = head * tail, head in <S>.
ParabolicSplit strip_parabolic_head(const DefiningGraph& graph, const Word& g, std::uint64_t s_mask);

bool commutes(const DefiningGraph& graph, const Word& g, const Word& h);

// Greedy layered factorization test: does w lie in the product set
// <S_1> <S_2> ... <S_k>?  On success returns the factors.
std::optional<std::vector<NormalForm>> parabolic_product_factor(
    const DefiningGraph& graph, const Word& w, const std::vector<std::uint64_t>& layer_masks);

// All distinct group elements of word length <= radius, as normal forms in
// shortlex order.  Throws ResourceLimitError past `cap` elements.
std::vector<NormalForm> ball_enumerate(const DefiningGraph& graph, int radius,
                                       std::size_t cap = 5'000'000);

// Formatting helpers shared by the CLI and exports.  Names may be empty, in
// which case generators print as x0, x1, ...
std::string format_word(const Word& w, const std::vector<std::string>& names = {});
Word parse_word(const std::string& text, const std::vector<std::string>& names, int alphabet_size);

}  // namespace cosetc
