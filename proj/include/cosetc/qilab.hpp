#pragma once

// Constructions and checks around the commensurated core and the
// quasi-isometry chain for two-dimensional RAAGs: star cores, maximal-simplex
// slices, the simplicial map onto the star complex, explicit coned-off paths,
// hyperbolicity estimates, and cross-verified malnormality and packing
// reports.

#include <cstdint>
#include <optional>
#include <vector>

#include "cosetc/complex.hpp"
#include "cosetc/oracles.hpp"
#include "cosetc/stallings.hpp"

namespace cosetc {

// Maximal standard abelian peripherals of a triangle-free graph, in the
// canonical (sorted) order used by the RAAG oracle.
std::vector<std::pair<int, int>> maximal_abelian_pairs(const DefiningGraph& graph);

// ---------------------------------------------------------------------------
// Commensurated core.

struct StarCoreReport {
    struct Entry {
        int vertex = -1;
        std::vector<int> generators;  // Star(vertex)
        std::size_t stabilizing_samples = 0;
        std::size_t moving_samples = 0;
        bool passed = false;
    };
    std::vector<Entry> subgroups;
    bool all_passed = false;
};

// The star subgroups as the commensurated core, with sampled verification
// that members of g<Star(a)>g^-1 stabilize the maximal-simplex slice setwise
// while sampled non-members move it.
StarCoreReport star_core(const DefiningGraph& graph, int slice_radius, std::uint64_t seed);

// All cosets g w <a,c> with w in the radius ball of <Star(a)> and c in
// Link(a), canonicalized and deduplicated; every pair is verified to pass the
// simplex test with common witness a.
std::vector<CosetId> maximal_simplex_slice(const DefiningGraph& graph, const Word& g, int axis,
                                           int radius);

// Membership predicate of the (infinite) slice.
bool slice_contains(const DefiningGraph& graph, const Word& g, int axis, const CosetId& coset);

// ---------------------------------------------------------------------------
// The simplicial map K(G,P) -> K(G,Q).

struct SimplicialMapReport {
    std::vector<int> edge_axis;            // witness generator per ball edge
    std::vector<CosetId> edge_axis_coset;  // star coset (peripheral = generator)
    bool simplicial_ok = false;            // simplices map to single star cosets
    bool equivariance_ok = false;          // sampled translations commute with the map
};
SimplicialMapReport map_P_to_Q(const DefiningGraph& graph, const PairOracle& oracle,
                               const ComplexBall& ball, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Explicit coned-off paths for star-coset edges (length at most four).

struct ConedPath {
    struct Hop {
        bool is_coset = false;
        CosetId coset;  // peripheral = star vertex
        Word element;
    };
    std::vector<Hop> nodes;  // alternating coset / element vertices
    int length = 0;
};
ConedPath conedoff_path4(const DefiningGraph& graph, const CosetId& from_star,
                         const CosetId& to_star);

// ---------------------------------------------------------------------------
// Four-point hyperbolicity defect.

struct DeltaReport {
    double delta = 0.0;
    std::size_t quadruples = 0;
    bool exhaustive = false;
};
DeltaReport four_point_delta(const GraphExport& graph, std::uint64_t seed,
                             std::size_t sample_count = 100'000);

// ---------------------------------------------------------------------------
// Cross-verified reports.

struct MalnormalCrosscheck {
    bool certificate_malnormal = false;
    bool ball_edgeless = false;
    bool agree = false;
    Word violation;
};
MalnormalCrosscheck malnormal_crosscheck(const std::vector<CoreGraph>& peripherals,
                                         const PairOracle& oracle, int radius);

struct PackingReport {
    std::optional<int> max_radius;  // over ball simplices
    bool exact = false;
    std::size_t simplices_checked = 0;
};
// Exact (automata) for free backends when `cores` is supplied; witness-based
// upper bounds otherwise.
PackingReport packing_radius(const PairOracle& oracle, const ComplexBall& ball,
                             const std::vector<CoreGraph>* cores = nullptr);

// ---------------------------------------------------------------------------
// Distortion fitting and the quasi-isometry chain.

struct DistortionReport {
    struct Point {
        double l = 1.0;
        double c = 0.0;
    };
    std::vector<Point> frontier;  // minimal C per swept L, both QI inequalities
    std::size_t samples = 0;
    double max_additive_defect = 0.0;  // M of the pair-map definition
};
DistortionReport fit_distortion(const std::vector<std::pair<int, int>>& distance_pairs);

struct QiChainReport {
    DistortionReport p_to_q;
    DistortionReport q_to_coned;
    DistortionReport coned_to_extension;
    DistortionReport composite;
    std::size_t p_vertices = 0, q_vertices = 0, coned_vertices = 0, extension_vertices = 0;
};
QiChainReport qi_chain(const DefiningGraph& graph, int radius, std::uint64_t seed,
                       const BallOptions& opts = {});

}  // namespace cosetc
