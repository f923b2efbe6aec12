#pragma once

// Finite balls of the coset intersection complex and its relatives: the
// tau-filtered complexes, coned-off Cayley graphs, extension graphs, and
// their statistics and exports.

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cosetc/oracles.hpp"

namespace cosetc {

struct BallOptions {
    int max_dim = 6;
    std::size_t vertex_cap = 100'000;
    int threads = 1;
};

struct SimplexRecord {
    std::vector<int> vertices;  // sorted indices into the ball vertex list
    Word witness;
};

struct ComplexBall {
    std::string pair_description;
    int radius = 0;
    std::optional<int> tau;  // set for K_tau balls
    std::vector<CosetId> vertices;
    std::vector<std::array<int, 2>> edges;
    std::vector<Word> edge_witnesses;
    std::vector<SimplexRecord> simplices;  // cardinality >= 3 only
    bool dim_capped = false;
    bool simplices_supported = true;
};

// All cosets with representatives of length <= radius, all edges among them,
// and all simplices up to the dimension cap.  Deterministic output order.
ComplexBall build_ball(const PairOracle& oracle, int radius, const BallOptions& opts = {});

// Ball of K_tau: vertices as above, simplices by unboundedness of
// tau-neighborhood intersections (free-group pairs only).
ComplexBall build_ktau_ball(const PairOracle& oracle, int radius, int tau,
                            const BallOptions& opts = {});

struct DimensionStats {
    int max_simplex_cardinality = 0;
    std::vector<int> max_simplex;  // realizing vertex indices
    int max_clique_cardinality = 0;
    std::vector<int> max_clique;
    std::vector<std::size_t> simplex_counts;  // index = cardinality
    bool dim_capped = false;
};
DimensionStats clique_and_dimension_stats(const ComplexBall& ball);

struct ConnectivityReport {
    int component_count = 0;
    std::vector<int> component_of;
    std::vector<std::size_t> component_sizes;
    std::size_t isolated_vertices = 0;
};
ConnectivityReport connectivity(const ComplexBall& ball);

struct EdgeOrbitCensus {
    struct Orbit {
        std::string key;
        std::size_t count = 0;
        int representative_edge = -1;
        std::optional<int> coset_distance;
    };
    std::vector<Orbit> orbits;
    std::optional<int> fence_estimate;  // max coset distance over ball edges
    bool exact = true;                  // false when a bounded search was inconclusive
};
EdgeOrbitCensus edge_orbit_census(const PairOracle& oracle, const ComplexBall& ball);

// Plain labeled graph used for coned-off and extension graphs and for DOT
// export of 1-skeleta.
struct GraphExport {
    struct Node {
        std::string id;
        std::string label;
        std::string kind;  // "element" | "coset" | "conjugate"
    };
    std::vector<Node> nodes;
    std::vector<std::array<int, 2>> edges;
    std::map<std::string, std::string> metadata;

    std::vector<std::vector<int>> adjacency() const;
};

// Coned-off Cayley graph ball: group elements of length <= radius, coset
// vertices, edges {g, gs} and {g, gP}; the extended version also includes the
// K(G,P) edges between coset vertices.
GraphExport build_coned_off(const PairOracle& oracle, int radius,
                            const std::vector<Word>& relative_generators, bool extended,
                            const BallOptions& opts = {});

// Extension graph ball: conjugates v^g for g in the radius ball, canonicalized
// by the coset g<Star(v)>, with edges given by the exact commutation test.
GraphExport build_extension_graph(const DefiningGraph& graph, int radius,
                                  const std::vector<std::string>& names = {},
                                  const BallOptions& opts = {});

GraphExport skeleton_of(const ComplexBall& ball, const PairOracle& oracle);

std::string export_dot(const GraphExport& graph);
std::string export_ball_json(const ComplexBall& ball, const PairOracle& oracle);
// Round-trip check helper: parses export_ball_json output.
ComplexBall parse_ball_json(const std::string& text, const PairOracle& oracle);

}  // namespace cosetc
