#pragma once

// Run configuration: a small key-value format with [section.subsection]
// tables, string/integer/list values, and full error collection.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cosetc/oracles.hpp"

namespace cosetc {

struct RunConfig {
    GroupPairSpec pair;
    std::string command;
    int radius = 2;
    std::optional<int> tau;
    int max_dim = 6;
    std::optional<std::uint64_t> seed;
    std::size_t cap_vertices = 100'000;
    std::string format = "json";  // "json" | "dot"
    std::vector<Word> relative_generators;
    bool extended = false;
    int threads = 1;
};

// Parses and validates; throws ConfigError carrying every violation found.
RunConfig parse_config(const std::string& text);

// Canonical re-emission of a parsed config (normalized whitespace and order).
std::string emit_config(const RunConfig& config);

// Commands: build-complex, ktau, coned-off, extension-graph, height,
// width-lower-bound, malnormal, core, packing, fence, qi-chain, delta.
// Writes deterministic artifacts under out_dir and a summary JSON to status.
int run_command(const RunConfig& config, const std::string& out_dir, std::ostream& status);

const std::vector<std::string>& known_commands();

}  // namespace cosetc
