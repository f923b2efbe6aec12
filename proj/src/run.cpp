#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cosetc/complex.hpp"
#include "cosetc/config.hpp"
#include "cosetc/qilab.hpp"

namespace cosetc {

namespace {

using nlohmann::json;

void write_file(const std::string& out_dir, const std::string& name, const std::string& data) {
    std::filesystem::create_directories(out_dir);
    std::ofstream os(std::filesystem::path(out_dir) / name, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + name + " under " + out_dir);
    os << data;
}

json graph_json(const GraphExport& g) {
    json j;
    j["version"] = 1;
    j["kind"] = "graph";
    j["metadata"] = g.metadata;
    json nodes = json::array();
    for (const auto& n : g.nodes) {
        json jn;
        jn["id"] = n.id;
        jn["label"] = n.label;
        jn["node_kind"] = n.kind;
        nodes.push_back(jn);
    }
    j["nodes"] = nodes;
    json edges = json::array();
    for (const auto& e : g.edges) edges.push_back({e[0], e[1]});
    j["edges"] = edges;
    return j;
}

json distortion_json(const DistortionReport& r) {
    json j;
    j["samples"] = r.samples;
    j["max_additive_defect"] = r.max_additive_defect;
    json frontier = json::array();
    for (const auto& pt : r.frontier) {
        json p;
        p["L"] = pt.l;
        p["C"] = pt.c;
        frontier.push_back(p);
    }
    j["frontier"] = frontier;
    return j;
}

std::vector<CoreGraph> free_cores(const GroupPairSpec& spec) {
    std::vector<CoreGraph> cores;
    for (const auto& gens : spec.peripherals)
        cores.push_back(CoreGraph::of_subgroup(spec.rank, gens));
    return cores;
}

}  // namespace

int run_command(const RunConfig& config, const std::string& out_dir, std::ostream& status) {
    auto oracle = make_oracle(config.pair);
    BallOptions opts;
    opts.max_dim = config.max_dim;
    opts.vertex_cap = config.cap_vertices;
    opts.threads = config.threads;

    json report;
    report["check"] = config.command;
    report["pair"] = oracle->describe();
    json params;
    params["radius"] = config.radius;
    params["max_dim"] = config.max_dim;
    params["cap_vertices"] = config.cap_vertices;
    if (config.tau) params["tau"] = *config.tau;
    report["params"] = params;
    if (config.seed) report["seed"] = *config.seed;
    json evidence = json::array();

    const std::string& cmd = config.command;
    if (cmd == "build-complex" || cmd == "ktau") {
        ComplexBall ball = cmd == "ktau"
                               ? build_ktau_ball(*oracle, config.radius, *config.tau, opts)
                               : build_ball(*oracle, config.radius, opts);
        write_file(out_dir, cmd + ".json", export_ball_json(ball, *oracle));
        if (config.format == "dot")
            write_file(out_dir, cmd + ".dot", export_dot(skeleton_of(ball, *oracle)));
        DimensionStats stats = clique_and_dimension_stats(ball);
        ConnectivityReport conn = connectivity(ball);
        report["verdict"] = "built";
        json ev;
        ev["vertices"] = ball.vertices.size();
        ev["edges"] = ball.edges.size();
        ev["max_simplex_cardinality"] = stats.max_simplex_cardinality;
        ev["max_clique_cardinality"] = stats.max_clique_cardinality;
        ev["dim_capped"] = stats.dim_capped;
        ev["components_at_radius"] = conn.component_count;
        ev["isolated_vertices"] = conn.isolated_vertices;
        evidence.push_back(ev);
    } else if (cmd == "coned-off") {
        GraphExport g = build_coned_off(*oracle, config.radius, config.relative_generators,
                                        config.extended, opts);
        write_file(out_dir, "coned-off.json", graph_json(g).dump(2) + "\n");
        if (config.format == "dot") write_file(out_dir, "coned-off.dot", export_dot(g));
        report["verdict"] = "built";
        json ev;
        ev["nodes"] = g.nodes.size();
        ev["edges"] = g.edges.size();
        ev["extended"] = config.extended;
        evidence.push_back(ev);
    } else if (cmd == "extension-graph") {
        if (config.pair.kind != GroupPairSpec::Kind::Raag)
            throw CapabilityError("extension-graph needs a RAAG pair");
        GraphExport g =
            build_extension_graph(config.pair.graph, config.radius, config.pair.names, opts);
        write_file(out_dir, "extension-graph.json", graph_json(g).dump(2) + "\n");
        if (config.format == "dot") write_file(out_dir, "extension-graph.dot", export_dot(g));
        report["verdict"] = "built";
        json ev;
        ev["nodes"] = g.nodes.size();
        ev["edges"] = g.edges.size();
        evidence.push_back(ev);
    } else if (cmd == "height") {
        if (config.pair.kind != GroupPairSpec::Kind::Free)
            throw CapabilityError("exact height needs a free-group pair");
        auto cores = free_cores(config.pair);
        auto height = height_exact_free(cores, config.max_dim + 1);
        if (height) {
            report["verdict"] = "exact";
            json ev;
            ev["height"] = *height;
            evidence.push_back(ev);
        } else {
            report["verdict"] = "cap-exceeded";
            json ev;
            ev["cap"] = config.max_dim + 1;
            evidence.push_back(ev);
        }
    } else if (cmd == "width-lower-bound") {
        ComplexBall ball = build_ball(*oracle, config.radius, opts);
        DimensionStats stats = clique_and_dimension_stats(ball);
        report["verdict"] = "lower-bound";
        json ev;
        ev["max_clique_cardinality"] = stats.max_clique_cardinality;
        json clique = json::array();
        const auto& names = oracle->generator_names();
        for (int v : stats.max_clique) {
            const CosetId& c = ball.vertices[v];
            clique.push_back(format_word(c.rep, names) + " * " +
                             oracle->peripheral_label(c.peripheral));
        }
        ev["realizing_clique"] = clique;
        evidence.push_back(ev);
    } else if (cmd == "malnormal") {
        if (config.pair.kind == GroupPairSpec::Kind::Free) {
            auto cores = free_cores(config.pair);
            auto cross = malnormal_crosscheck(cores, *oracle, config.radius);
            report["verdict"] = cross.agree
                                    ? (cross.certificate_malnormal ? "malnormal" : "not-malnormal")
                                    : "DISAGREEMENT";
            json ev;
            ev["certificate"] = cross.certificate_malnormal;
            ev["ball_edgeless"] = cross.ball_edgeless;
            ev["agree"] = cross.agree;
            if (!cross.violation.empty())
                ev["violation"] = format_word(cross.violation, oracle->generator_names());
            evidence.push_back(ev);
            if (!cross.agree) {
                report["evidence"] = evidence;
                std::string text = report.dump(2) + "\n";
                write_file(out_dir, "report.json", text);
                status << text;
                return 1;
            }
        } else {
            ComplexBall ball = build_ball(*oracle, config.radius, opts);
            report["verdict"] = ball.edges.empty() ? "edgeless-at-radius" : "not-malnormal";
            json ev;
            ev["edges"] = ball.edges.size();
            evidence.push_back(ev);
        }
    } else if (cmd == "core") {
        if (config.pair.kind != GroupPairSpec::Kind::Raag)
            throw CapabilityError("commensurated core reports need a RAAG pair");
        StarCoreReport core =
            star_core(config.pair.graph, std::min(config.radius, 2), config.seed.value_or(0));
        report["verdict"] = core.all_passed ? "verified" : "FAILED";
        for (const auto& entry : core.subgroups) {
            json ev;
            ev["vertex"] = config.pair.names[entry.vertex];
            json gens = json::array();
            for (int v : entry.generators) gens.push_back(config.pair.names[v]);
            ev["star"] = gens;
            ev["stabilizing_samples"] = entry.stabilizing_samples;
            ev["moving_samples"] = entry.moving_samples;
            ev["passed"] = entry.passed;
            evidence.push_back(ev);
        }
    } else if (cmd == "packing") {
        ComplexBall ball = build_ball(*oracle, config.radius, opts);
        auto cores = config.pair.kind == GroupPairSpec::Kind::Free
                         ? std::optional<std::vector<CoreGraph>>(free_cores(config.pair))
                         : std::nullopt;
        PackingReport packing = packing_radius(*oracle, ball, cores ? &*cores : nullptr);
        report["verdict"] = packing.exact ? "exact" : "upper-bound";
        json ev;
        if (packing.max_radius) ev["packing_radius"] = *packing.max_radius;
        ev["simplices_checked"] = packing.simplices_checked;
        evidence.push_back(ev);
    } else if (cmd == "fence") {
        ComplexBall ball = build_ball(*oracle, config.radius, opts);
        EdgeOrbitCensus census = edge_orbit_census(*oracle, ball);
        report["verdict"] = census.exact ? "exact" : "bounded";
        json ev;
        ev["edge_orbits"] = census.orbits.size();
        if (census.fence_estimate) ev["fence_estimate"] = *census.fence_estimate;
        json orbits = json::array();
        for (const auto& orbit : census.orbits) {
            json jo;
            jo["key"] = orbit.key;
            jo["count"] = orbit.count;
            if (orbit.coset_distance) jo["coset_distance"] = *orbit.coset_distance;
            orbits.push_back(jo);
        }
        ev["orbits"] = orbits;
        evidence.push_back(ev);
    } else if (cmd == "qi-chain") {
        if (config.pair.kind != GroupPairSpec::Kind::Raag)
            throw CapabilityError("the quasi-isometry chain needs a RAAG pair");
        QiChainReport chain =
            qi_chain(config.pair.graph, config.radius, config.seed.value_or(0), opts);
        report["verdict"] = "measured";
        json ev;
        ev["p_vertices"] = chain.p_vertices;
        ev["q_vertices"] = chain.q_vertices;
        ev["coned_vertices"] = chain.coned_vertices;
        ev["extension_vertices"] = chain.extension_vertices;
        ev["p_to_q"] = distortion_json(chain.p_to_q);
        ev["q_to_coned"] = distortion_json(chain.q_to_coned);
        ev["coned_to_extension"] = distortion_json(chain.coned_to_extension);
        ev["composite"] = distortion_json(chain.composite);
        evidence.push_back(ev);
    } else if (cmd == "delta") {
        GraphExport g;
        if (config.pair.kind == GroupPairSpec::Kind::Raag)
            g = build_extension_graph(config.pair.graph, config.radius, config.pair.names, opts);
        else
            g = skeleton_of(build_ball(*oracle, config.radius, opts), *oracle);
        DeltaReport delta = four_point_delta(g, config.seed.value_or(0));
        report["verdict"] = "measured";
        json ev;
        ev["delta"] = delta.delta;
        ev["quadruples"] = delta.quadruples;
        ev["exhaustive"] = delta.exhaustive;
        ev["vertices"] = g.nodes.size();
        evidence.push_back(ev);
    } else {
        throw ConfigError({"unknown command '" + cmd + "'"});
    }

    report["evidence"] = evidence;
    std::string text = report.dump(2) + "\n";
    write_file(out_dir, "report.json", text);
    status << text;
    return 0;
}

}  // namespace cosetc
