#pragma once

// Stallings core graphs for finitely generated subgroups of free groups:
// folding, membership, fiber products, malnormality certificates, exact
// height, commensurability tests.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cosetc/words.hpp"

namespace cosetc {

// Directed graph with edges labeled by positive generators; inverse traversal
// is implicit.  -1 marks a missing transition.
struct LabeledGraph {
    int rank = 0;                       // alphabet size
    std::vector<std::vector<int>> out;  // out[v][g] = head of g-edge at v
    std::vector<std::vector<int>> in;   // in[v][g]  = tail of g-edge into v

    int size() const { return static_cast<int>(out.size()); }
    int add_vertex();
    int step(int v, Letter l) const {
        return l > 0 ? out[v][gen_of(l)] : in[v][gen_of(l)];
    }
    std::size_t edge_count() const;
    int degree(int v) const;
    bool has_cycle_in_component(int seed) const;
};

// Folded based core graph of a finitely generated subgroup.
class CoreGraph {
  public:
    CoreGraph() = default;

    // Petal construction: one loop per generator word, then fold and prune.
    static CoreGraph of_subgroup(int rank, const std::vector<Word>& generators);

    // Core graph of the conjugate g P g^-1: a spur reading g is prefixed to
    // the basepoint, the result folded and re-cored from the spur end.
    CoreGraph conjugate(const Word& g) const;

    const LabeledGraph& graph() const { return g_; }
    int basepoint() const { return base_; }
    int rank_alphabet() const { return g_.rank; }
    int vertex_count() const { return g_.size(); }
    std::size_t edge_count() const { return g_.edge_count(); }
    // Free rank of the subgroup: edges - vertices + 1.
    int subgroup_rank() const { return static_cast<int>(edge_count()) - g_.size() + 1; }
    bool trivial() const { return edge_count() == 0; }

    bool member(const Word& g) const;

    // Shortlex-least reduced word in the left coset g P.  Two words yield the
    // same output iff they lie in the same coset.
    Word coset_min_rep(const Word& g) const;

    // Stable fingerprint of the labeled rooted graph, used by tests to check
    // folding confluence.
    std::string canonical_hash() const;

  private:
    LabeledGraph g_;
    int base_ = -1;
};

// One component of a k-fold label-matching product of core graphs.
struct FiberComponent {
    LabeledGraph graph;
    std::vector<int> subgroup_of_coord;         // index into the input list
    std::vector<std::vector<int>> projections;  // projections[v][coord] = vertex in input core
    bool has_cycle = false;

    // Coordinates i,j carry equal cosets (computed at build time).
    std::vector<std::vector<bool>> coincident;
};

struct FiberOptions {
    std::size_t state_cap = 1'000'000;
};

// Components of the label-matching product of the conjugated core graphs.
std::vector<FiberComponent> fiber_product(const std::vector<std::pair<CoreGraph, Word>>& factors,
                                          const FiberOptions& opts = {});

// Left coset of a free-group subgroup, by index into a peripheral list.
struct FreeCoset {
    int subgroup = 0;
    Word rep;
};

struct IntersectionWitness {
    bool infinite = false;
    Word element;  // nontrivial element of the intersection when infinite
};

// Is the intersection of the conjugates g_i P_i g_i^-1 infinite?  On success
// the witness element is returned and membership-verified in every conjugate.
IntersectionWitness infinite_intersection_free(const std::vector<CoreGraph>& peripherals,
                                               const std::vector<FreeCoset>& cosets,
                                               const FiberOptions& opts = {});

struct MalnormalityVerdict {
    bool malnormal = false;
    Word violation_conjugator;  // g with P cap gPg^-1 infinite, gP != P
};

MalnormalityVerdict malnormality_certificate(const CoreGraph& p);

// Largest m <= cap such that m distinct cosets of the listed subgroups have
// infinite common intersection.  nullopt means the cap was hit.
std::optional<int> height_exact_free(const std::vector<CoreGraph>& peripherals, int cap,
                                     const FiberOptions& opts = {});

// True iff sub has finite index in sup.  Requires sub <= sup.
bool finite_index_test(const CoreGraph& sub, const CoreGraph& sup);

// True iff P cap gPg^-1 has finite index in both P and gPg^-1.
bool is_commensurating(const CoreGraph& p, const Word& g);

}  // namespace cosetc
