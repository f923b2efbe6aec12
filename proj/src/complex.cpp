#include "cosetc/complex.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace cosetc {

namespace {

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body) {
    if (threads <= 1 || n < 64) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    std::size_t chunk = (n + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
        std::size_t lo = t * chunk, hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &body] {
            for (std::size_t i = lo; i < hi; ++i) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

ComplexBall build_ball_impl(const PairOracle& oracle, int radius, std::optional<int> tau,
                            const BallOptions& opts) {
    if (tau && !oracle.capabilities().ktau_supported)
        throw CapabilityError("K_tau is unsupported for " + oracle.describe());
    ComplexBall ball;
    ball.pair_description = oracle.describe();
    ball.radius = radius;
    ball.tau = tau;
    EnumOptions eopts;
    eopts.cap = opts.vertex_cap;
    ball.vertices = oracle.enumerate_cosets(radius, eopts);
    ball.simplices_supported = oracle.capabilities().higher_simplices;

    auto test = [&](const std::vector<CosetId>& cs, Witness* w) {
        return tau ? oracle.ktau_simplex(cs, *tau) : oracle.infinite_intersection(cs, w);
    };

    // Edges: all unordered pairs, tested exactly; assembly order is fixed by
    // the index pairs regardless of the worker schedule.
    std::size_t n = ball.vertices.size();
    std::vector<std::pair<int, int>> pairs;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            pairs.push_back({static_cast<int>(i), static_cast<int>(j)});
    std::vector<char> verdict(pairs.size(), 0);
    std::vector<Word> witnesses(pairs.size());
    parallel_for(pairs.size(), opts.threads, [&](std::size_t idx) {
        auto [i, j] = pairs[idx];
        Witness w;
        if (test({ball.vertices[i], ball.vertices[j]}, &w)) {
            verdict[idx] = 1;
            witnesses[idx] = w.element;
        }
    });
    for (std::size_t idx = 0; idx < pairs.size(); ++idx) {
        if (!verdict[idx]) continue;
        ball.edges.push_back({pairs[idx].first, pairs[idx].second});
        ball.edge_witnesses.push_back(witnesses[idx]);
        // Witness soundness: both memberships must re-verify independently.
        if (!tau && !witnesses[idx].empty()) {
            const CosetId& a = ball.vertices[pairs[idx].first];
            const CosetId& b = ball.vertices[pairs[idx].second];
            if (!oracle.member_of_conjugate(a, witnesses[idx]) ||
                !oracle.member_of_conjugate(b, witnesses[idx]))
                throw PreconditionError("edge witness failed membership verification");
        }
    }

    if (!ball.simplices_supported) return ball;

    // Clique extension with per-clique exact tests; flagness is never assumed.
    std::vector<std::vector<char>> adj(n, std::vector<char>(n, 0));
    for (const auto& e : ball.edges) adj[e[0]][e[1]] = adj[e[1]][e[0]] = 1;
    std::vector<std::vector<int>> frontier;
    for (const auto& e : ball.edges) frontier.push_back({e[0], e[1]});
    for (int card = 3; card <= opts.max_dim + 1 && !frontier.empty(); ++card) {
        std::vector<std::vector<int>> candidates;
        for (const auto& simplex : frontier)
            for (int v = simplex.back() + 1; v < static_cast<int>(n); ++v) {
                bool clique = true;
                for (int u : simplex) clique = clique && adj[u][v];
                if (!clique) continue;
                std::vector<int> next = simplex;
                next.push_back(v);
                candidates.push_back(std::move(next));
            }
        std::vector<char> ok(candidates.size(), 0);
        std::vector<Word> ws(candidates.size());
        parallel_for(candidates.size(), opts.threads, [&](std::size_t idx) {
            std::vector<CosetId> cs;
            for (int v : candidates[idx]) cs.push_back(ball.vertices[v]);
            Witness w;
            if (test(cs, &w)) {
                ok[idx] = 1;
                ws[idx] = w.element;
            }
        });
        std::vector<std::vector<int>> kept;
        for (std::size_t idx = 0; idx < candidates.size(); ++idx) {
            if (!ok[idx]) continue;
            ball.simplices.push_back({candidates[idx], ws[idx]});
            kept.push_back(candidates[idx]);
        }
        if (card == opts.max_dim + 1 && !kept.empty()) ball.dim_capped = true;
        frontier = std::move(kept);
    }
    return ball;
}

}  // namespace

ComplexBall build_ball(const PairOracle& oracle, int radius, const BallOptions& opts) {
    return build_ball_impl(oracle, radius, std::nullopt, opts);
}

ComplexBall build_ktau_ball(const PairOracle& oracle, int radius, int tau,
                            const BallOptions& opts) {
    if (tau < 0) throw PreconditionError("negative tau");
    return build_ball_impl(oracle, radius, tau, opts);
}

DimensionStats clique_and_dimension_stats(const ComplexBall& ball) {
    DimensionStats stats;
    stats.dim_capped = ball.dim_capped;
    std::size_t n = ball.vertices.size();
    stats.simplex_counts.assign(2, 0);
    stats.simplex_counts[1] = n;
    if (n > 0) {
        stats.max_simplex_cardinality = 1;
        stats.max_simplex = {0};
    }
    if (!ball.edges.empty()) {
        stats.simplex_counts.push_back(ball.edges.size());
        stats.max_simplex_cardinality = 2;
        stats.max_simplex = {ball.edges[0][0], ball.edges[0][1]};
    }
    for (const auto& s : ball.simplices) {
        std::size_t card = s.vertices.size();
        if (stats.simplex_counts.size() <= card) stats.simplex_counts.resize(card + 1, 0);
        ++stats.simplex_counts[card];
        if (static_cast<int>(card) > stats.max_simplex_cardinality) {
            stats.max_simplex_cardinality = static_cast<int>(card);
            stats.max_simplex = s.vertices;
        }
    }

    // Exact maximum clique in the 1-skeleton (Bron-Kerbosch with pivoting).
    std::vector<std::vector<char>> adj(n, std::vector<char>(n, 0));
    for (const auto& e : ball.edges) adj[e[0]][e[1]] = adj[e[1]][e[0]] = 1;
    std::vector<int> best, cur;
    std::function<void(std::vector<int>&, std::vector<int>&)> expand =
        [&](std::vector<int>& cand, std::vector<int>& excluded) {
            if (cand.empty() && excluded.empty()) {
                if (cur.size() > best.size()) best = cur;
                return;
            }
            if (cur.size() + cand.size() <= best.size()) return;
            int pivot = !cand.empty() ? cand.front()
                                      : (!excluded.empty() ? excluded.front() : -1);
            std::vector<int> ext;
            for (int v : cand)
                if (pivot < 0 || !adj[pivot][v]) ext.push_back(v);
            for (int v : ext) {
                std::vector<int> nc, nx;
                for (int u : cand)
                    if (adj[v][u]) nc.push_back(u);
                for (int u : excluded)
                    if (adj[v][u]) nx.push_back(u);
                cur.push_back(v);
                expand(nc, nx);
                cur.pop_back();
                cand.erase(std::find(cand.begin(), cand.end(), v));
                excluded.push_back(v);
            }
        };
    std::vector<int> cand(n), excluded;
    std::iota(cand.begin(), cand.end(), 0);
    if (n > 0) expand(cand, excluded);
    stats.max_clique = best;
    stats.max_clique_cardinality = static_cast<int>(best.size());
    return stats;
}

ConnectivityReport connectivity(const ComplexBall& ball) {
    ConnectivityReport rep;
    std::size_t n = ball.vertices.size();
    rep.component_of.assign(n, -1);
    std::vector<std::vector<int>> adj(n);
    for (const auto& e : ball.edges) {
        adj[e[0]].push_back(e[1]);
        adj[e[1]].push_back(e[0]);
    }
    for (std::size_t s = 0; s < n; ++s) {
        if (rep.component_of[s] >= 0) continue;
        int c = rep.component_count++;
        std::vector<int> stack{static_cast<int>(s)};
        rep.component_of[s] = c;
        std::size_t size = 0;
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            ++size;
            for (int u : adj[v])
                if (rep.component_of[u] < 0) {
                    rep.component_of[u] = c;
                    stack.push_back(u);
                }
        }
        rep.component_sizes.push_back(size);
        if (size == 1) ++rep.isolated_vertices;
    }
    return rep;
}

EdgeOrbitCensus edge_orbit_census(const PairOracle& oracle, const ComplexBall& ball) {
    EdgeOrbitCensus census;
    std::map<std::string, EdgeOrbitCensus::Orbit> orbits;
    const auto& names = oracle.generator_names();
    for (std::size_t e = 0; e < ball.edges.size(); ++e) {
        const CosetId& a = ball.vertices[ball.edges[e][0]];
        const CosetId& b = ball.vertices[ball.edges[e][1]];
        auto key_of = [&](const CosetId& u, const CosetId& v) {
            std::ostringstream os;
            os << 'p' << u.peripheral << "|p" << v.peripheral << '|';
            auto rep = oracle.double_coset_min_rep(u, v);
            if (rep) {
                os << format_word(*rep, names);
            } else {
                census.exact = false;
                os << '~' << format_word(free_reduce(u.rep.inverse_word().concat(v.rep)).word,
                                         names);
            }
            return os.str();
        };
        std::string k1 = key_of(a, b), k2 = key_of(b, a);
        std::string key = std::min(k1, k2);
        auto [it, fresh] = orbits.try_emplace(key);
        it->second.key = key;
        ++it->second.count;
        if (fresh) {
            it->second.representative_edge = static_cast<int>(e);
            it->second.coset_distance = oracle.coset_distance(a, b);
        }
        if (!it->second.coset_distance) census.exact = false;
    }
    std::optional<int> fence;
    for (auto& [key, orbit] : orbits) {
        if (orbit.coset_distance) fence = std::max(fence.value_or(0), *orbit.coset_distance);
        census.orbits.push_back(orbit);
    }
    census.fence_estimate = ball.edges.empty() ? std::optional<int>(0) : fence;
    return census;
}

std::vector<std::vector<int>> GraphExport::adjacency() const {
    std::vector<std::vector<int>> adj(nodes.size());
    for (const auto& e : edges) {
        adj[e[0]].push_back(e[1]);
        adj[e[1]].push_back(e[0]);
    }
    return adj;
}

GraphExport build_coned_off(const PairOracle& oracle, int radius,
                            const std::vector<Word>& relative_generators, bool extended,
                            const BallOptions& opts) {
    if (relative_generators.empty() && !oracle.peripherals_generate())
        throw ConfigError({"coned-off graph: empty relative generating set, but the "
                           "peripherals do not generate the group"});
    GraphExport g;
    EnumOptions eopts;
    eopts.cap = opts.vertex_cap;
    auto elements = oracle.ball(radius, eopts);
    const auto& names = oracle.generator_names();

    std::map<std::string, int> element_index;
    for (const auto& nf : elements) {
        std::string label = format_word(nf.word, names);
        element_index[label] = static_cast<int>(g.nodes.size());
        g.nodes.push_back({"g" + std::to_string(g.nodes.size()), label, "element"});
    }
    auto cosets = oracle.enumerate_cosets(radius, eopts);
    std::map<std::string, int> coset_index;
    auto coset_key = [&](const CosetId& c) {
        return format_word(c.rep, names) + " * " + oracle.peripheral_label(c.peripheral);
    };
    for (const auto& c : cosets) {
        coset_index[coset_key(c)] = static_cast<int>(g.nodes.size());
        g.nodes.push_back(
            {"c" + std::to_string(coset_index.size() - 1), coset_key(c), "coset"});
    }

    std::set<std::array<int, 2>> edges;
    for (const auto& nf : elements) {
        int from = element_index.at(format_word(nf.word, names));
        for (const Word& s : relative_generators) {
            NormalForm target = oracle.normalize(nf.word.concat(s));
            auto it = element_index.find(format_word(target.word, names));
            if (it == element_index.end() || it->second == from) continue;
            int a = std::min(from, it->second), b = std::max(from, it->second);
            edges.insert({a, b});
        }
        for (int p = 0; p < oracle.peripheral_count(); ++p) {
            CosetId c = oracle.canonical_coset(p, nf.word);
            auto it = coset_index.find(coset_key(c));
            if (it == coset_index.end()) continue;
            edges.insert({from, it->second});
        }
    }
    if (extended) {
        for (std::size_t i = 0; i < cosets.size(); ++i)
            for (std::size_t j = i + 1; j < cosets.size(); ++j)
                if (oracle.infinite_intersection({cosets[i], cosets[j]}))
                    edges.insert({coset_index.at(coset_key(cosets[i])),
                                  coset_index.at(coset_key(cosets[j]))});
    }
    g.edges.assign(edges.begin(), edges.end());
    g.metadata["pair"] = oracle.describe();
    g.metadata["radius"] = std::to_string(radius);
    g.metadata["extended"] = extended ? "true" : "false";
    g.metadata["relative_generators"] = std::to_string(relative_generators.size());
    return g;
}

GraphExport build_extension_graph(const DefiningGraph& graph, int radius,
                                  const std::vector<std::string>& names,
                                  const BallOptions& opts) {
    std::vector<std::string> vnames = names;
    if (vnames.empty())
        for (int v = 0; v < graph.size(); ++v) vnames.push_back("v" + std::to_string(v));
    GraphExport g;
    // Vertices: conjugates v^h canonicalized by the coset h<Star(v)>.
    struct Vertex {
        int gen;
        Word coset_rep;
        Word conjugate;  // normal form of h v h^-1
    };
    std::vector<Vertex> vertices;
    std::set<std::pair<int, std::vector<Letter>>> seen;
    for (const auto& nf : ball_enumerate(graph, radius, opts.vertex_cap)) {
        for (int v = 0; v < graph.size(); ++v) {
            Word rep = strip_parabolic_tail(graph, nf.word, graph.star_mask(v)).head.word;
            if (!seen.insert({v, rep.letters}).second) continue;
            Word conj = rep.concat(Word{{make_letter(v, +1)}}).concat(rep.inverse_word());
            vertices.push_back({v, rep, nf_raag(graph, conj).word});
        }
    }
    std::sort(vertices.begin(), vertices.end(), [](const Vertex& a, const Vertex& b) {
        if (a.coset_rep != b.coset_rep) return shortlex_less(a.coset_rep, b.coset_rep);
        return a.gen < b.gen;
    });
    for (const auto& v : vertices) {
        std::string label = vnames[v.gen] + "^(" + format_word(v.coset_rep, vnames) + ")";
        g.nodes.push_back({"e" + std::to_string(g.nodes.size()), label, "conjugate"});
    }
    std::size_t n = vertices.size();
    std::vector<std::array<int, 2>> pairs;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            pairs.push_back({static_cast<int>(i), static_cast<int>(j)});
    std::vector<char> adj(pairs.size(), 0);
    parallel_for(pairs.size(), opts.threads, [&](std::size_t idx) {
        const Vertex& a = vertices[pairs[idx][0]];
        const Vertex& b = vertices[pairs[idx][1]];
        if (commutes(graph, a.conjugate, b.conjugate)) adj[idx] = 1;
    });
    for (std::size_t idx = 0; idx < pairs.size(); ++idx)
        if (adj[idx]) g.edges.push_back(pairs[idx]);
    g.metadata["graph"] = "extension";
    g.metadata["radius"] = std::to_string(radius);
    g.metadata["generators"] = std::to_string(graph.size());
    return g;
}

GraphExport skeleton_of(const ComplexBall& ball, const PairOracle& oracle) {
    GraphExport g;
    const auto& names = oracle.generator_names();
    for (const auto& c : ball.vertices) {
        std::string label =
            format_word(c.rep, names) + " * " + oracle.peripheral_label(c.peripheral);
        g.nodes.push_back({"c" + std::to_string(g.nodes.size()), label, "coset"});
    }
    g.edges = ball.edges;
    g.metadata["pair"] = ball.pair_description;
    g.metadata["radius"] = std::to_string(ball.radius);
    if (ball.tau) g.metadata["tau"] = std::to_string(*ball.tau);
    return g;
}

std::string export_dot(const GraphExport& graph) {
    std::ostringstream os;
    os << "graph ball {\n";
    for (const auto& [k, v] : graph.metadata) os << "  // " << k << ": " << v << "\n";
    for (const auto& node : graph.nodes) {
        os << "  " << node.id << " [label=\"" << node.label << "\"";
        if (node.kind == "coset") os << ", shape=box";
        if (node.kind == "conjugate") os << ", shape=ellipse";
        os << "];\n";
    }
    for (const auto& e : graph.edges)
        os << "  " << graph.nodes[e[0]].id << " -- " << graph.nodes[e[1]].id << ";\n";
    os << "}\n";
    return os.str();
}

std::string export_ball_json(const ComplexBall& ball, const PairOracle& oracle) {
    nlohmann::json j;
    j["version"] = 1;
    j["pair"] = ball.pair_description;
    j["radius"] = ball.radius;
    if (ball.tau) j["tau"] = *ball.tau;
    const auto& names = oracle.generator_names();
    nlohmann::json verts = nlohmann::json::array();
    for (const auto& c : ball.vertices) {
        nlohmann::json v;
        v["p"] = c.peripheral;
        v["rep"] = format_word(c.rep, names);
        if (!c.payload.empty()) v["payload"] = c.payload;
        verts.push_back(v);
    }
    j["vertices"] = verts;
    nlohmann::json edges = nlohmann::json::array();
    for (std::size_t e = 0; e < ball.edges.size(); ++e) {
        nlohmann::json je;
        je["u"] = ball.edges[e][0];
        je["v"] = ball.edges[e][1];
        je["witness"] = format_word(ball.edge_witnesses[e], names);
        edges.push_back(je);
    }
    j["edges"] = edges;
    nlohmann::json simplices = nlohmann::json::array();
    for (const auto& s : ball.simplices) {
        nlohmann::json js;
        js["vertices"] = s.vertices;
        js["witness"] = format_word(s.witness, names);
        simplices.push_back(js);
    }
    j["simplices"] = simplices;
    DimensionStats stats = clique_and_dimension_stats(ball);
    nlohmann::json jstats;
    jstats["max_simplex_cardinality"] = stats.max_simplex_cardinality;
    jstats["max_clique_cardinality"] = stats.max_clique_cardinality;
    jstats["counts_per_cardinality"] = stats.simplex_counts;
    jstats["dim_capped"] = stats.dim_capped;
    j["stats"] = jstats;
    return j.dump(2) + "\n";
}

ComplexBall parse_ball_json(const std::string& text, const PairOracle& oracle) {
    nlohmann::json j = nlohmann::json::parse(text);
    if (j.at("version").get<int>() != 1) throw MalformedError("unknown ball schema version");
    ComplexBall ball;
    ball.pair_description = j.at("pair").get<std::string>();
    ball.radius = j.at("radius").get<int>();
    if (j.contains("tau")) ball.tau = j.at("tau").get<int>();
    const auto& names = oracle.generator_names();
    int alphabet = oracle.alphabet_size();
    for (const auto& v : j.at("vertices")) {
        CosetId c;
        c.peripheral = v.at("p").get<int>();
        c.rep = parse_word(v.at("rep").get<std::string>(), names, alphabet);
        if (v.contains("payload")) c.payload = v.at("payload").get<std::string>();
        ball.vertices.push_back(c);
    }
    for (const auto& e : j.at("edges")) {
        ball.edges.push_back({e.at("u").get<int>(), e.at("v").get<int>()});
        ball.edge_witnesses.push_back(
            parse_word(e.at("witness").get<std::string>(), names, alphabet));
    }
    for (const auto& s : j.at("simplices")) {
        SimplexRecord rec;
        rec.vertices = s.at("vertices").get<std::vector<int>>();
        rec.witness = parse_word(s.at("witness").get<std::string>(), names, alphabet);
        ball.simplices.push_back(rec);
    }
    return ball;
}

}  // namespace cosetc
