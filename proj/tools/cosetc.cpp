// Command-line front end: parses a pair config, applies flag overrides, and
// dispatches to the library.  Errors come back as machine-readable JSON on
// stderr with a nonzero exit status.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "cosetc/config.hpp"

int main(int argc, char** argv) {
    CLI::App app{"cosetc: finite slices of coset intersection complexes"};
    std::string config_path, out_dir = ".", format;
    int radius = -1, tau = -1, max_dim = -1;
    long long seed = -1, cap_vertices = -1;
    app.add_option("--config", config_path, "pair/run configuration file")->required();
    app.add_option("--out", out_dir, "output directory for artifacts");
    app.add_option("--format", format, "artifact format: json or dot");
    app.add_option("--seed", seed, "seed for sampling commands");
    app.add_option("--radius", radius, "ball radius override");
    app.add_option("--tau", tau, "tau override for filtered complexes");
    app.add_option("--max-dim", max_dim, "simplex dimension cap override");
    app.add_option("--cap-vertices", cap_vertices, "vertex cap override");
    CLI11_PARSE(app, argc, argv);

    try {
        std::ifstream in(config_path);
        if (!in) throw cosetc::ConfigError({"cannot open config file " + config_path});
        std::stringstream buffer;
        buffer << in.rdbuf();
        cosetc::RunConfig config = cosetc::parse_config(buffer.str());
        if (radius >= 0) config.radius = radius;
        if (tau >= 0) config.tau = tau;
        if (max_dim >= 0) config.max_dim = max_dim;
        if (seed >= 0) config.seed = static_cast<std::uint64_t>(seed);
        if (cap_vertices > 0) config.cap_vertices = static_cast<std::size_t>(cap_vertices);
        if (!format.empty()) config.format = format;
        if (const char* env = std::getenv("COSETC_THREADS"))
            config.threads = std::max(1, std::atoi(env));
        return cosetc::run_command(config, out_dir, std::cout);
    } catch (const cosetc::ConfigError& e) {
        nlohmann::json err;
        err["error"] = "config";
        err["violations"] = e.violations;
        std::cerr << err.dump(2) << "\n";
        return 2;
    } catch (const std::exception& e) {
        nlohmann::json err;
        err["error"] = "runtime";
        err["what"] = e.what();
        std::cerr << err.dump(2) << "\n";
        return 1;
    }
}
