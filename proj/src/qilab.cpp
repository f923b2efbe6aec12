#include "cosetc/qilab.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <random>
#include <set>
#include <sstream>

#include "cosetc/rational.hpp"

namespace cosetc {

std::vector<std::pair<int, int>> maximal_abelian_pairs(const DefiningGraph& graph) {
    std::vector<std::pair<int, int>> pairs;
    for (int a = 0; a < graph.size(); ++a)
        for (int b = a + 1; b < graph.size(); ++b)
            if (graph.adjacent(a, b)) pairs.push_back({a, b});
    return pairs;
}

namespace {

void require_core_hypotheses(const DefiningGraph& g) {
    if (!g.connected()) throw CapabilityError("star core needs a connected defining graph");
    if (!g.triangle_free()) throw CapabilityError("star core needs a triangle-free graph");
    if (g.min_valence() < 2) throw CapabilityError("star core needs minimal valence >= 2");
}

int pair_index(const std::vector<std::pair<int, int>>& pairs, int a, int b) {
    if (a > b) std::swap(a, b);
    for (std::size_t i = 0; i < pairs.size(); ++i)
        if (pairs[i] == std::make_pair(a, b)) return static_cast<int>(i);
    throw PreconditionError("not a maximal abelian pair");
}

std::vector<int> bfs_distances(const std::vector<std::vector<int>>& adj, int src) {
    std::vector<int> dist(adj.size(), -1);
    std::queue<int> q;
    dist[src] = 0;
    q.push(src);
    while (!q.empty()) {
        int v = q.front();
        q.pop();
        for (int u : adj[v])
            if (dist[u] < 0) {
                dist[u] = dist[v] + 1;
                q.push(u);
            }
    }
    return dist;
}

}  // namespace

bool slice_contains(const DefiningGraph& graph, const Word& g, int axis, const CosetId& coset) {
    auto pairs = maximal_abelian_pairs(graph);
    auto [a, b] = pairs.at(coset.peripheral);
    if (a != axis && b != axis) return false;
    Word diff = g.inverse_word().concat(coset.rep);
    return (support_mask(nf_raag(graph, diff)) & ~graph.star_mask(axis)) == 0;
}

std::vector<CosetId> maximal_simplex_slice(const DefiningGraph& graph, const Word& g, int axis,
                                           int radius) {
    require_core_hypotheses(graph);
    auto pairs = maximal_abelian_pairs(graph);
    std::set<CosetId> out;
    for (const auto& nf : ball_enumerate(graph, radius)) {
        if ((support_mask(nf) & ~graph.star_mask(axis)) != 0) continue;  // w in <Star(axis)>
        for (int c : graph.link(axis)) {
            int p = pair_index(pairs, axis, c);
            std::uint64_t mask =
                (std::uint64_t{1} << pairs[p].first) | (std::uint64_t{1} << pairs[p].second);
            CosetId id;
            id.peripheral = p;
            id.rep = strip_parabolic_tail(graph, g.concat(nf.word), mask).head.word;
            out.insert(id);
        }
    }
    std::vector<CosetId> slice{out.begin(), out.end()};
    // Every pair must pass the simplex test through the common axis.
    for (std::size_t i = 0; i < slice.size(); ++i)
        for (std::size_t j = i + 1; j < slice.size(); ++j) {
            Word diff = slice[i].rep.inverse_word().concat(slice[j].rep);
            bool ok = (support_mask(nf_raag(graph, diff)) & ~graph.star_mask(axis)) == 0;
            if (!ok) throw PreconditionError("slice pair fails the common-axis simplex test");
        }
    return slice;
}

StarCoreReport star_core(const DefiningGraph& graph, int slice_radius, std::uint64_t seed) {
    require_core_hypotheses(graph);
    StarCoreReport report;
    report.all_passed = true;
    std::mt19937_64 rng(seed);
    for (int a = 0; a < graph.size(); ++a) {
        StarCoreReport::Entry entry;
        entry.vertex = a;
        entry.generators = graph.star(a);
        entry.passed = true;

        // Random base translate g, then sample stabilizer members g w g^-1.
        Word g;
        for (int i = 0; i < 2; ++i)
            g.letters.push_back(
                make_letter(static_cast<int>(rng() % graph.size()), rng() % 2 ? 1 : -1));
        auto slice = maximal_simplex_slice(graph, g, a, slice_radius);
        std::vector<NormalForm> star_ball;
        for (const auto& nf : ball_enumerate(graph, 2))
            if ((support_mask(nf) & ~graph.star_mask(a)) == 0) star_ball.push_back(nf);
        for (std::size_t s = 0; s < 10; ++s) {
            const Word& w = star_ball[rng() % star_ball.size()].word;
            Word h = g.concat(w).concat(g.inverse_word());
            bool stabilizes = true;
            for (const auto& coset : slice) {
                CosetId moved = coset;
                moved.rep = h.concat(coset.rep);
                auto pairs = maximal_abelian_pairs(graph);
                std::uint64_t mask = (std::uint64_t{1} << pairs[moved.peripheral].first) |
                                     (std::uint64_t{1} << pairs[moved.peripheral].second);
                moved.rep = strip_parabolic_tail(graph, moved.rep, mask).head.word;
                stabilizes = stabilizes && slice_contains(graph, g, a, moved);
            }
            if (stabilizes)
                ++entry.stabilizing_samples;
            else
                entry.passed = false;
        }
        // Sampled non-members must move the slice.
        for (std::size_t s = 0; s < 10; ++s) {
            Word h;
            int len = 1 + static_cast<int>(rng() % 3);
            for (int i = 0; i < len; ++i)
                h.letters.push_back(
                    make_letter(static_cast<int>(rng() % graph.size()), rng() % 2 ? 1 : -1));
            Word conj = g.inverse_word().concat(h).concat(g);
            if ((support_mask(nf_raag(graph, conj)) & ~graph.star_mask(a)) == 0) continue;
            bool moved_out = false;
            for (const auto& coset : slice) {
                CosetId moved = coset;
                auto pairs = maximal_abelian_pairs(graph);
                std::uint64_t mask = (std::uint64_t{1} << pairs[moved.peripheral].first) |
                                     (std::uint64_t{1} << pairs[moved.peripheral].second);
                moved.rep =
                    strip_parabolic_tail(graph, h.concat(coset.rep), mask).head.word;
                if (!slice_contains(graph, g, a, moved)) {
                    moved_out = true;
                    break;
                }
            }
            if (moved_out)
                ++entry.moving_samples;
            else
                entry.passed = false;
        }
        report.all_passed = report.all_passed && entry.passed;
        report.subgroups.push_back(std::move(entry));
    }
    return report;
}

SimplicialMapReport map_P_to_Q(const DefiningGraph& graph, const PairOracle& oracle,
                               const ComplexBall& ball, std::uint64_t seed) {
    auto pairs = maximal_abelian_pairs(graph);
    SimplicialMapReport report;
    report.simplicial_ok = true;
    report.equivariance_ok = true;
    std::map<std::pair<int, int>, std::size_t> edge_index;
    for (std::size_t e = 0; e < ball.edges.size(); ++e) {
        const CosetId& u = ball.vertices[ball.edges[e][0]];
        const CosetId& v = ball.vertices[ball.edges[e][1]];
        auto verdict =
            raag_edge_criterion(graph, pairs[u.peripheral], u.rep, pairs[v.peripheral], v.rep);
        if (!verdict.edge) throw PreconditionError("ball edge rejected by the edge criterion");
        int axis = verdict.witness_generator;
        CosetId star;
        star.peripheral = axis;
        star.rep = strip_parabolic_tail(graph, u.rep, graph.star_mask(axis)).head.word;
        // Same star coset through the other endpoint.
        Word other = strip_parabolic_tail(graph, v.rep, graph.star_mask(axis)).head.word;
        if (!(other == star.rep))
            throw PreconditionError("edge axis coset differs between the endpoints");
        report.edge_axis.push_back(axis);
        report.edge_axis_coset.push_back(star);
        edge_index[{ball.edges[e][0], ball.edges[e][1]}] = e;
    }
    // Simplices map to a single star vertex of K(G,Q).
    for (const auto& s : ball.simplices) {
        std::set<std::pair<int, std::vector<Letter>>> images;
        for (std::size_t i = 0; i < s.vertices.size(); ++i)
            for (std::size_t j = i + 1; j < s.vertices.size(); ++j) {
                auto it = edge_index.find({std::min(s.vertices[i], s.vertices[j]),
                                           std::max(s.vertices[i], s.vertices[j])});
                if (it == edge_index.end()) continue;
                const CosetId& axis = report.edge_axis_coset[it->second];
                images.insert({axis.peripheral, axis.rep.letters});
            }
        if (images.size() > 1) report.simplicial_ok = false;
    }
    // Equivariance on sampled translations.
    std::mt19937_64 rng(seed);
    for (int trial = 0; trial < 20 && !ball.edges.empty(); ++trial) {
        std::size_t e = rng() % ball.edges.size();
        Word h;
        for (int i = 0; i < 2; ++i)
            h.letters.push_back(
                make_letter(static_cast<int>(rng() % graph.size()), rng() % 2 ? 1 : -1));
        const CosetId& u = ball.vertices[ball.edges[e][0]];
        const CosetId& v = ball.vertices[ball.edges[e][1]];
        CosetId tu = oracle.translate(h, u), tv = oracle.translate(h, v);
        auto verdict =
            raag_edge_criterion(graph, pairs[tu.peripheral], tu.rep, pairs[tv.peripheral], tv.rep);
        if (!verdict.edge) {
            report.equivariance_ok = false;
            continue;
        }
        Word translated_axis =
            strip_parabolic_tail(graph, h.concat(report.edge_axis_coset[e].rep),
                                 graph.star_mask(report.edge_axis[e]))
                .head.word;
        Word direct = strip_parabolic_tail(graph, tu.rep,
                                           graph.star_mask(verdict.witness_generator))
                          .head.word;
        if (verdict.witness_generator != report.edge_axis[e] || !(translated_axis == direct))
            report.equivariance_ok = false;
    }
    return report;
}

ConedPath conedoff_path4(const DefiningGraph& graph, const CosetId& from_star,
                         const CosetId& to_star) {
    if (from_star == to_star) {
        ConedPath trivial;
        ConedPath::Hop h;
        h.is_coset = true;
        h.coset = from_star;
        trivial.nodes.push_back(h);
        trivial.length = 0;
        return trivial;
    }
    auto verdict = raag_star_edge(graph, from_star.peripheral, from_star.rep, to_star.peripheral,
                                  to_star.rep);
    if (!verdict.edge)
        throw PreconditionError("conedoff_path4: the star cosets have no infinite intersection");
    Word h1 = from_star.rep.concat(verdict.alpha.word);
    Word h2 = h1.concat(verdict.middle.word);
    int x = verdict.witness_generator;

    ConedPath path;
    auto coset_hop = [&](int vertex, const Word& g) {
        ConedPath::Hop hop;
        hop.is_coset = true;
        hop.coset.peripheral = vertex;
        hop.coset.rep = strip_parabolic_tail(graph, g, graph.star_mask(vertex)).head.word;
        return hop;
    };
    auto element_hop = [&](const Word& g) {
        ConedPath::Hop hop;
        hop.element = nf_raag(graph, g).word;
        return hop;
    };
    path.nodes.push_back(coset_hop(from_star.peripheral, from_star.rep));
    path.nodes.push_back(element_hop(h1));
    path.nodes.push_back(coset_hop(x, h1));
    path.nodes.push_back(element_hop(h2));
    path.nodes.push_back(coset_hop(to_star.peripheral, to_star.rep));
    path.length = 4;

    // Verify every hop is a legal coned-off edge {g, g <Star(v)>}.
    for (std::size_t i = 0; i + 1 < path.nodes.size(); ++i) {
        const auto& a = path.nodes[i];
        const auto& b = path.nodes[i + 1];
        const auto& coset = a.is_coset ? a.coset : b.coset;
        const Word& elem = a.is_coset ? b.element : a.element;
        Word stripped =
            strip_parabolic_tail(graph, elem, graph.star_mask(coset.peripheral)).head.word;
        if (!(stripped == coset.rep))
            throw PreconditionError("conedoff_path4: illegal hop in the constructed path");
    }
    if (!(path.nodes.front().coset == from_star) || !(path.nodes.back().coset == to_star))
        throw PreconditionError("conedoff_path4: endpoints do not match");
    return path;
}

DeltaReport four_point_delta(const GraphExport& graph, std::uint64_t seed,
                             std::size_t sample_count) {
    DeltaReport report;
    std::size_t n = graph.nodes.size();
    if (n < 4) return report;
    auto adj = graph.adjacency();
    std::vector<std::vector<int>> dist(n);
    for (std::size_t v = 0; v < n; ++v) {
        dist[v] = bfs_distances(adj, static_cast<int>(v));
        for (int d : dist[v])
            if (d < 0) throw PreconditionError("four_point_delta: graph ball is disconnected");
    }
    auto defect = [&](int w, int x, int y, int z) {
        int d1 = dist[w][x] + dist[y][z];
        int d2 = dist[w][y] + dist[x][z];
        int d3 = dist[w][z] + dist[x][y];
        int hi = std::max({d1, d2, d3});
        int mid = d1 + d2 + d3 - hi - std::min({d1, d2, d3});
        return (hi - mid) / 2.0;
    };
    if (n <= 200) {
        report.exhaustive = true;
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = a + 1; b < n; ++b)
                for (std::size_t c = b + 1; c < n; ++c)
                    for (std::size_t d = c + 1; d < n; ++d) {
                        ++report.quadruples;
                        report.delta = std::max(
                            report.delta, defect(static_cast<int>(a), static_cast<int>(b),
                                                 static_cast<int>(c), static_cast<int>(d)));
                    }
        return report;
    }
    std::mt19937_64 rng(seed);
    for (std::size_t s = 0; s < sample_count; ++s) {
        std::size_t a = rng() % n, b = rng() % n, c = rng() % n, d = rng() % n;
        if (a == b || a == c || a == d || b == c || b == d || c == d) continue;
        ++report.quadruples;
        report.delta = std::max(report.delta, defect(static_cast<int>(a), static_cast<int>(b),
                                                     static_cast<int>(c), static_cast<int>(d)));
    }
    return report;
}

MalnormalCrosscheck malnormal_crosscheck(const std::vector<CoreGraph>& peripherals,
                                         const PairOracle& oracle, int radius) {
    MalnormalCrosscheck result;
    result.certificate_malnormal = true;
    std::vector<std::string> hashes;
    for (const CoreGraph& p : peripherals) hashes.push_back(p.canonical_hash());
    for (std::size_t i = 0; i < peripherals.size() && result.certificate_malnormal; ++i) {
        auto verdict = malnormality_certificate(peripherals[i]);
        if (!verdict.malnormal) {
            result.certificate_malnormal = false;
            result.violation = verdict.violation_conjugator;
        }
        for (std::size_t j = i + 1; j < peripherals.size() && result.certificate_malnormal; ++j) {
            if (hashes[i] == hashes[j]) continue;
            for (const auto& fc : fiber_product({{peripherals[i], Word{}}, {peripherals[j], Word{}}}))
                if (fc.has_cycle) {
                    result.certificate_malnormal = false;
                    break;
                }
        }
    }
    ComplexBall ball = build_ball(oracle, radius);
    result.ball_edgeless = ball.edges.empty();
    result.agree = result.certificate_malnormal == result.ball_edgeless;
    return result;
}

PackingReport packing_radius(const PairOracle& oracle, const ComplexBall& ball,
                             const std::vector<CoreGraph>* cores) {
    PackingReport report;
    report.exact = cores != nullptr;
    auto handle = [&](const std::vector<int>& simplex) {
        ++report.simplices_checked;
        std::vector<CosetId> cs;
        for (int v : simplex) cs.push_back(ball.vertices[v]);
        if (cores) {
            // Exact: smallest r with a nonempty intersection of the
            // r-neighborhood automata.  r is bounded by max |rep|, realized
            // by the identity.
            int bound = 0;
            for (const auto& c : cs) bound = std::max(bound, static_cast<int>(c.rep.size()));
            for (int r = 0; r <= bound; ++r) {
                std::optional<ReducedNfa> acc;
                for (const auto& c : cs) {
                    ReducedNfa nb =
                        ReducedNfa::coset(cores->at(c.peripheral), c.rep).neighborhood(r);
                    acc = acc ? acc->intersect(nb) : nb;
                }
                if (!acc->is_empty()) {
                    report.max_radius = std::max(report.max_radius.value_or(0), r);
                    return;
                }
            }
            throw PreconditionError("packing radius exceeded its bound");
        }
        // Upper bound: best candidate center among the identity and the
        // representatives, using exact point-to-coset distances.
        std::vector<Word> candidates{Word{}};
        for (const auto& c : cs) candidates.push_back(c.rep);
        int best = -1;
        for (const Word& x : candidates) {
            int worst = 0;
            for (const auto& c : cs) {
                Word diff = x.inverse_word().concat(c.rep);
                int d = static_cast<int>(
                    oracle.canonical_coset(c.peripheral, diff).rep.size());
                worst = std::max(worst, d);
            }
            best = best < 0 ? worst : std::min(best, worst);
        }
        report.max_radius = std::max(report.max_radius.value_or(0), best);
    };
    for (const auto& e : ball.edges) handle({e[0], e[1]});
    for (const auto& s : ball.simplices) handle(s.vertices);
    if (!report.max_radius && !ball.vertices.empty()) report.max_radius = 0;
    return report;
}

DistortionReport fit_distortion(const std::vector<std::pair<int, int>>& distance_pairs) {
    DistortionReport report;
    report.samples = distance_pairs.size();
    for (double l : {1.0, 1.5, 2.0, 3.0, 4.0}) {
        double c = 0.0;
        for (auto [dp, dq] : distance_pairs) {
            c = std::max(c, dq - l * dp);
            c = std::max(c, dp / l - dq);
        }
        report.frontier.push_back({l, c});
    }
    return report;
}

QiChainReport qi_chain(const DefiningGraph& graph, int radius, std::uint64_t seed,
                       const BallOptions& opts) {
    require_core_hypotheses(graph);
    QiChainReport report;
    GroupPairSpec pspec;
    pspec.kind = GroupPairSpec::Kind::Raag;
    pspec.graph = graph;
    pspec.raag_maximal_abelians = true;
    auto p_oracle = make_oracle(pspec);
    GroupPairSpec qspec = pspec;
    qspec.raag_maximal_abelians = false;
    qspec.raag_stars = true;
    auto q_oracle = make_oracle(qspec);

    BallOptions ball_opts = opts;
    ball_opts.max_dim = 2;
    ComplexBall p_ball = build_ball(*p_oracle, radius, ball_opts);
    ComplexBall q_ball = build_ball(*q_oracle, radius, ball_opts);
    GraphExport coned = build_coned_off(*q_oracle, radius, {}, false, opts);
    GraphExport extension = build_extension_graph(graph, radius, q_oracle->generator_names(), opts);
    report.p_vertices = p_ball.vertices.size();
    report.q_vertices = q_ball.vertices.size();
    report.coned_vertices = coned.nodes.size();
    report.extension_vertices = extension.nodes.size();

    // Vertex maps along the chain.
    auto pairs = maximal_abelian_pairs(graph);
    auto find_q = [&](const CosetId& star) {
        for (std::size_t i = 0; i < q_ball.vertices.size(); ++i)
            if (q_ball.vertices[i] == star) return static_cast<int>(i);
        return -1;
    };
    std::vector<int> p_to_q_map(p_ball.vertices.size(), -1);
    for (std::size_t i = 0; i < p_ball.vertices.size(); ++i) {
        const CosetId& c = p_ball.vertices[i];
        int axis = pairs[c.peripheral].first;  // deterministic choice
        CosetId star;
        star.peripheral = axis;
        star.rep = strip_parabolic_tail(graph, c.rep, graph.star_mask(axis)).head.word;
        p_to_q_map[i] = find_q(star);
    }
    const auto& names = q_oracle->generator_names();
    std::map<std::string, int> coned_index;
    for (std::size_t i = 0; i < coned.nodes.size(); ++i) coned_index[coned.nodes[i].label] = i;
    std::map<std::string, int> ext_index;
    for (std::size_t i = 0; i < extension.nodes.size(); ++i)
        ext_index[extension.nodes[i].label] = i;
    auto q_to_coned = [&](const CosetId& star) {
        std::string label =
            format_word(star.rep, names) + " * " + q_oracle->peripheral_label(star.peripheral);
        auto it = coned_index.find(label);
        return it == coned_index.end() ? -1 : it->second;
    };
    auto q_to_ext = [&](const CosetId& star) {
        std::string label =
            names[star.peripheral] + "^(" + format_word(star.rep, names) + ")";
        auto it = ext_index.find(label);
        return it == ext_index.end() ? -1 : it->second;
    };

    // Distances within the four balls.
    std::vector<std::vector<int>> padj(p_ball.vertices.size());
    for (const auto& e : p_ball.edges) {
        padj[e[0]].push_back(e[1]);
        padj[e[1]].push_back(e[0]);
    }
    std::vector<std::vector<int>> qadj(q_ball.vertices.size());
    for (const auto& e : q_ball.edges) {
        qadj[e[0]].push_back(e[1]);
        qadj[e[1]].push_back(e[0]);
    }
    auto cadj = coned.adjacency();
    auto eadj = extension.adjacency();

    std::mt19937_64 rng(seed);
    std::vector<std::pair<int, int>> s1, s2, s3, comp;
    for (int trial = 0; trial < 300; ++trial) {
        std::size_t i = rng() % p_ball.vertices.size();
        std::size_t j = rng() % p_ball.vertices.size();
        if (i == j) continue;
        int qi = p_to_q_map[i], qj = p_to_q_map[j];
        if (qi < 0 || qj < 0) continue;
        int ci = q_to_coned(q_ball.vertices[qi]), cj = q_to_coned(q_ball.vertices[qj]);
        int ei = q_to_ext(q_ball.vertices[qi]), ej = q_to_ext(q_ball.vertices[qj]);
        if (ci < 0 || cj < 0 || ei < 0 || ej < 0) continue;
        auto dp = bfs_distances(padj, static_cast<int>(i))[j];
        auto dq = bfs_distances(qadj, qi)[qj];
        auto dc = bfs_distances(cadj, ci)[cj];
        auto de = bfs_distances(eadj, ei)[ej];
        if (dp < 0 || dq < 0 || dc < 0 || de < 0) continue;
        s1.push_back({dp, dq});
        s2.push_back({dq, dc});
        s3.push_back({dc, de});
        comp.push_back({dp, de});
    }
    report.p_to_q = fit_distortion(s1);
    report.q_to_coned = fit_distortion(s2);
    report.coned_to_extension = fit_distortion(s3);
    report.composite = fit_distortion(comp);
    return report;
}

}  // namespace cosetc
