#include "cosetc/config.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <sstream>
#include <variant>

namespace cosetc {

namespace {

struct Value;
using ValueList = std::vector<Value>;
struct Value : std::variant<long long, std::string, ValueList> {
    using variant::variant;
};

// Recursive value grammar: integers, "strings", [ lists ].
class ValueParser {
  public:
    ValueParser(const std::string& text, std::vector<std::string>& errors, int line)
        : text_(text), errors_(errors), line_(line) {}

    std::optional<Value> parse() {
        skip_ws();
        auto v = value();
        skip_ws();
        if (pos_ != text_.size()) {
            error("trailing characters after value");
            return std::nullopt;
        }
        return v;
    }

  private:
    void error(const std::string& what) {
        errors_.push_back("line " + std::to_string(line_) + ": " + what);
    }
    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    std::optional<Value> value() {
        if (pos_ >= text_.size()) {
            error("missing value");
            return std::nullopt;
        }
        char c = text_[pos_];
        if (c == '"') return string();
        if (c == '[') return list();
        if (c == '-' || std::isdigit(static_cast<unsigned char>(c))) return integer();
        if (text_.compare(pos_, 4, "true") == 0) {
            pos_ += 4;
            return Value{1LL};
        }
        if (text_.compare(pos_, 5, "false") == 0) {
            pos_ += 5;
            return Value{0LL};
        }
        error("unrecognized value");
        return std::nullopt;
    }
    std::optional<Value> string() {
        ++pos_;  // opening quote
        std::string out;
        while (pos_ < text_.size() && text_[pos_] != '"') out.push_back(text_[pos_++]);
        if (pos_ >= text_.size()) {
            error("unterminated string");
            return std::nullopt;
        }
        ++pos_;
        return Value{out};
    }
    std::optional<Value> integer() {
        std::size_t start = pos_;
        if (text_[pos_] == '-') ++pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        try {
            return Value{std::stoll(text_.substr(start, pos_ - start))};
        } catch (const std::exception&) {
            error("bad integer");
            return std::nullopt;
        }
    }
    std::optional<Value> list() {
        ++pos_;  // opening bracket
        ValueList items;
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == ']') {
            ++pos_;
            return Value{items};
        }
        while (true) {
            skip_ws();
            auto v = value();
            if (!v) return std::nullopt;
            items.push_back(*v);
            skip_ws();
            if (pos_ < text_.size() && text_[pos_] == ',') {
                ++pos_;
                continue;
            }
            if (pos_ < text_.size() && text_[pos_] == ']') {
                ++pos_;
                return Value{items};
            }
            error("expected ',' or ']' in list");
            return std::nullopt;
        }
    }

    const std::string& text_;
    std::vector<std::string>& errors_;
    int line_;
    std::size_t pos_ = 0;
};

struct RawConfig {
    std::map<std::string, Value> entries;  // dotted keys
    std::vector<std::string> errors;

    bool has(const std::string& key) const { return entries.count(key) > 0; }
    std::optional<long long> get_int(const std::string& key) {
        auto it = entries.find(key);
        if (it == entries.end()) return std::nullopt;
        if (auto* v = std::get_if<long long>(&it->second)) return *v;
        errors.push_back("key '" + key + "' must be an integer");
        return std::nullopt;
    }
    std::optional<std::string> get_string(const std::string& key) {
        auto it = entries.find(key);
        if (it == entries.end()) return std::nullopt;
        if (auto* v = std::get_if<std::string>(&it->second)) return *v;
        errors.push_back("key '" + key + "' must be a string");
        return std::nullopt;
    }
    std::optional<ValueList> get_list(const std::string& key) {
        auto it = entries.find(key);
        if (it == entries.end()) return std::nullopt;
        if (auto* v = std::get_if<ValueList>(&it->second)) return *v;
        errors.push_back("key '" + key + "' must be a list");
        return std::nullopt;
    }
};

RawConfig parse_raw(const std::string& text) {
    RawConfig raw;
    std::istringstream is(text);
    std::string line, section;
    int lineno = 0;
    std::vector<std::string> known_keys{
        "type",     "rank",   "generators", "edges",  "k",        "keyword", "subgroups",
        "pairs",    "command", "radius",    "tau",    "max_dim",  "seed",    "cap_vertices",
        "format",   "srel",   "extended",  "threads"};
    while (std::getline(is, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::size_t b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        std::size_t e = line.find_last_not_of(" \t\r");
        line = line.substr(b, e - b + 1);
        if (line.front() == '[') {
            if (line.back() != ']') {
                raw.errors.push_back("line " + std::to_string(lineno) + ": unterminated section");
                continue;
            }
            section = line.substr(1, line.size() - 2);
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            raw.errors.push_back("line " + std::to_string(lineno) + ": expected key = value");
            continue;
        }
        std::string key = line.substr(0, eq);
        key.erase(key.find_last_not_of(" \t") + 1);
        std::string value_text = line.substr(eq + 1);
        if (std::find(known_keys.begin(), known_keys.end(), key) == known_keys.end()) {
            raw.errors.push_back("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
            continue;
        }
        ValueParser vp(value_text, raw.errors, lineno);
        auto v = vp.parse();
        if (!v) continue;
        std::string full = section.empty() ? key : section + "." + key;
        if (raw.entries.count(full))
            raw.errors.push_back("line " + std::to_string(lineno) + ": duplicate key '" + full +
                                 "'");
        raw.entries[full] = *v;
    }
    return raw;
}

std::vector<std::string> string_list(RawConfig& raw, const std::string& key) {
    std::vector<std::string> out;
    auto list = raw.get_list(key);
    if (!list) return out;
    for (const auto& item : *list) {
        if (auto* s = std::get_if<std::string>(&item))
            out.push_back(*s);
        else
            raw.errors.push_back("key '" + key + "' must be a list of strings");
    }
    return out;
}

GroupPairSpec parse_group(RawConfig& raw, const std::string& prefix,
                          std::vector<std::string>& errors);

void parse_peripherals(RawConfig& raw, const std::string& prefix, GroupPairSpec& spec,
                       std::vector<std::string>& errors) {
    std::string base = prefix.empty() ? "peripherals" : prefix + ".peripherals";
    // Keyword expansion for RAAGs.
    if (auto keyword = raw.get_string(base + ".keyword")) {
        if (*keyword == "maximal-abelians")
            spec.raag_maximal_abelians = true;
        else if (*keyword == "stars")
            spec.raag_stars = true;
        else
            errors.push_back("unknown peripherals keyword '" + *keyword + "'");
        if (spec.kind != GroupPairSpec::Kind::Raag)
            errors.push_back("peripheral keywords apply only to RAAG pairs");
        return;
    }
    auto subgroups = raw.get_list(base + ".subgroups");
    if (!subgroups) {
        if (spec.kind != GroupPairSpec::Kind::Product)
            errors.push_back("missing " + base + ".subgroups (or a RAAG keyword)");
        return;
    }
    int alphabet = spec.kind == GroupPairSpec::Kind::BS ? 2
                   : spec.kind == GroupPairSpec::Kind::Raag ? spec.graph.size()
                                                            : spec.rank;
    for (const auto& sub : *subgroups) {
        const auto* words = std::get_if<ValueList>(&sub);
        if (!words) {
            errors.push_back("each peripheral must be a list of generator words");
            continue;
        }
        std::vector<Word> parsed;
        for (const auto& wv : *words) {
            const auto* s = std::get_if<std::string>(&wv);
            if (!s) {
                errors.push_back("peripheral generator words must be strings");
                continue;
            }
            try {
                parsed.push_back(parse_word(*s, spec.names, alphabet));
            } catch (const MalformedError& e) {
                errors.push_back(std::string(e.what()));
            }
        }
        spec.peripherals.push_back(parsed);
    }
}

GroupPairSpec parse_group(RawConfig& raw, const std::string& prefix,
                          std::vector<std::string>& errors) {
    GroupPairSpec spec;
    std::string base = prefix.empty() ? "group" : prefix;
    auto type = raw.get_string(base + ".type");
    if (!type) {
        errors.push_back("missing " + base + ".type");
        return spec;
    }
    spec.names = string_list(raw, base + ".generators");
    if (*type == "free" || *type == "lattice") {
        spec.kind = *type == "free" ? GroupPairSpec::Kind::Free : GroupPairSpec::Kind::Lattice;
        auto rank = raw.get_int(base + ".rank");
        if (!rank || *rank <= 0)
            errors.push_back(base + ".rank must be a positive integer");
        else
            spec.rank = static_cast<int>(*rank);
        if (spec.names.empty())
            for (int i = 0; i < spec.rank; ++i) spec.names.push_back("x" + std::to_string(i));
    } else if (*type == "raag") {
        spec.kind = GroupPairSpec::Kind::Raag;
        auto edges = raw.get_list(base + ".edges");
        if (spec.names.empty()) {
            errors.push_back(base + ".generators is required for RAAG pairs");
            return spec;
        }
        spec.graph = DefiningGraph(static_cast<int>(spec.names.size()));
        if (!edges) {
            errors.push_back("missing " + base + ".edges");
            return spec;
        }
        for (const auto& ev : *edges) {
            const auto* pair = std::get_if<ValueList>(&ev);
            if (!pair || pair->size() != 2) {
                errors.push_back("each edge must be a pair of generator names");
                continue;
            }
            int idx[2] = {-1, -1};
            for (int i = 0; i < 2; ++i) {
                const auto* name = std::get_if<std::string>(&(*pair)[i]);
                if (name)
                    for (std::size_t v = 0; v < spec.names.size(); ++v)
                        if (spec.names[v] == *name) idx[i] = static_cast<int>(v);
                if (idx[i] < 0) errors.push_back("unknown generator in edge list");
            }
            if (idx[0] >= 0 && idx[1] >= 0) {
                try {
                    spec.graph.add_edge(idx[0], idx[1]);
                } catch (const MalformedError& e) {
                    errors.push_back(e.what());
                }
            }
        }
    } else if (*type == "bs") {
        spec.kind = GroupPairSpec::Kind::BS;
        auto k = raw.get_int(base + ".k");
        if (!k || *k < 2)
            errors.push_back(base + ".k must be an integer >= 2");
        else
            spec.bs_k = static_cast<int>(*k);
        if (spec.names.empty()) spec.names = {"a", "t"};
    } else if (*type == "product") {
        spec.kind = GroupPairSpec::Kind::Product;
        spec.left = std::make_shared<GroupPairSpec>(parse_group(raw, base + ".left", errors));
        spec.right = std::make_shared<GroupPairSpec>(parse_group(raw, base + ".right", errors));
        parse_peripherals(raw, base + ".left", *spec.left, errors);
        parse_peripherals(raw, base + ".right", *spec.right, errors);
        auto pairs = raw.get_list("product.pairs");
        if (!pairs) {
            errors.push_back("missing product.pairs");
        } else {
            for (const auto& pv : *pairs) {
                const auto* pair = std::get_if<ValueList>(&pv);
                if (!pair || pair->size() != 2) {
                    errors.push_back("each product pair must be [left, right] indices");
                    continue;
                }
                const auto* l = std::get_if<long long>(&(*pair)[0]);
                const auto* r = std::get_if<long long>(&(*pair)[1]);
                if (!l || !r) {
                    errors.push_back("product pair indices must be integers");
                    continue;
                }
                spec.product_pairs.push_back({static_cast<int>(*l), static_cast<int>(*r)});
            }
        }
    } else {
        errors.push_back("unknown group type '" + *type + "'");
    }
    return spec;
}

}  // namespace

const std::vector<std::string>& known_commands() {
    static const std::vector<std::string> commands{
        "build-complex", "ktau",      "coned-off", "extension-graph",
        "height",        "width-lower-bound",      "malnormal",
        "core",          "packing",   "fence",     "qi-chain",
        "delta"};
    return commands;
}

RunConfig parse_config(const std::string& text) {
    RawConfig raw = parse_raw(text);
    std::vector<std::string> errors = raw.errors;
    RunConfig config;

    config.pair = parse_group(raw, "", errors);
    if (config.pair.kind != GroupPairSpec::Kind::Product)
        parse_peripherals(raw, "", config.pair, errors);

    if (auto cmd = raw.get_string("run.command")) {
        config.command = *cmd;
        const auto& cmds = known_commands();
        if (std::find(cmds.begin(), cmds.end(), *cmd) == cmds.end())
            errors.push_back("unknown command '" + *cmd + "'");
    } else {
        errors.push_back("missing run.command");
    }
    if (auto r = raw.get_int("run.radius")) config.radius = static_cast<int>(*r);
    if (auto t = raw.get_int("run.tau")) config.tau = static_cast<int>(*t);
    if (auto m = raw.get_int("run.max_dim")) config.max_dim = static_cast<int>(*m);
    if (auto s = raw.get_int("run.seed")) config.seed = static_cast<std::uint64_t>(*s);
    if (auto c = raw.get_int("run.cap_vertices")) {
        if (*c <= 0)
            errors.push_back("run.cap_vertices must be positive");
        else
            config.cap_vertices = static_cast<std::size_t>(*c);
    }
    if (auto f = raw.get_string("run.format")) {
        config.format = *f;
        if (*f != "json" && *f != "dot") errors.push_back("run.format must be json or dot");
    }
    if (auto th = raw.get_int("run.threads")) config.threads = std::max(1, static_cast<int>(*th));
    if (auto ext = raw.get_int("run.extended")) config.extended = *ext != 0;
    if (raw.has("run.srel")) {
        int alphabet = config.pair.kind == GroupPairSpec::Kind::Raag ? config.pair.graph.size()
                       : config.pair.kind == GroupPairSpec::Kind::BS ? 2
                                                                     : config.pair.rank;
        for (const auto& s : string_list(raw, "run.srel")) {
            try {
                config.relative_generators.push_back(parse_word(s, config.pair.names, alphabet));
            } catch (const MalformedError& e) {
                errors.push_back(e.what());
            }
        }
    }

    // Validation beyond raw shape.
    if (config.radius < 0) errors.push_back("run.radius must be >= 0");
    if (config.max_dim < 1) errors.push_back("run.max_dim must be >= 1");
    if (config.tau && *config.tau < 0) errors.push_back("run.tau must be >= 0");
    if (config.command == "ktau" && !config.tau) errors.push_back("ktau requires run.tau");
    for (const char* sampling : {"qi-chain", "delta", "core"})
        if (config.command == sampling && !config.seed)
            errors.push_back("command '" + std::string(sampling) + "' requires run.seed");
    if (config.pair.kind == GroupPairSpec::Kind::Raag) {
        bool needs_hypotheses = config.command == "extension-graph" ||
                                config.command == "qi-chain" || config.command == "core";
        if (needs_hypotheses) {
            if (!config.pair.graph.triangle_free())
                errors.push_back("command '" + config.command +
                                 "' requires a triangle-free defining graph");
            if (config.pair.graph.min_valence() < 2)
                errors.push_back("command '" + config.command +
                                 "' requires minimal valence >= 2");
            if (!config.pair.graph.connected())
                errors.push_back("command '" + config.command +
                                 "' requires a connected defining graph");
        }
    }
    // Peripheral infiniteness and structural validity, via oracle construction.
    if (errors.empty()) {
        try {
            make_oracle(config.pair);
        } catch (const std::exception& e) {
            errors.push_back(e.what());
        }
    }
    if (!errors.empty()) throw ConfigError(errors);
    return config;
}

namespace {
void emit_peripherals(std::ostringstream& os, const GroupPairSpec& spec,
                      const std::string& prefix) {
    os << '[' << (prefix.empty() ? "peripherals" : prefix + ".peripherals") << "]\n";
    if (spec.raag_maximal_abelians) {
        os << "keyword = \"maximal-abelians\"\n";
        return;
    }
    if (spec.raag_stars) {
        os << "keyword = \"stars\"\n";
        return;
    }
    os << "subgroups = [";
    for (std::size_t p = 0; p < spec.peripherals.size(); ++p) {
        if (p) os << ", ";
        os << '[';
        for (std::size_t i = 0; i < spec.peripherals[p].size(); ++i)
            os << (i ? ", " : "") << '"' << format_word(spec.peripherals[p][i], spec.names)
               << '"';
        os << ']';
    }
    os << "]\n";
}
}  // namespace

std::string emit_config(const RunConfig& config) {
    std::ostringstream os;
    auto quote = [](const std::string& s) { return '"' + s + '"'; };
    std::function<void(const GroupPairSpec&, const std::string&)> group =
        [&](const GroupPairSpec& spec, const std::string& section) {
            os << '[' << section << "]\n";
            switch (spec.kind) {
                case GroupPairSpec::Kind::Free:
                    os << "type = \"free\"\n";
                    os << "rank = " << spec.rank << "\n";
                    break;
                case GroupPairSpec::Kind::Lattice:
                    os << "type = \"lattice\"\n";
                    os << "rank = " << spec.rank << "\n";
                    break;
                case GroupPairSpec::Kind::BS:
                    os << "type = \"bs\"\n";
                    os << "k = " << spec.bs_k << "\n";
                    break;
                case GroupPairSpec::Kind::Raag: {
                    os << "type = \"raag\"\n";
                    os << "generators = [";
                    for (std::size_t i = 0; i < spec.names.size(); ++i)
                        os << (i ? ", " : "") << quote(spec.names[i]);
                    os << "]\n";
                    os << "edges = [";
                    bool first = true;
                    for (int a = 0; a < spec.graph.size(); ++a)
                        for (int b = a + 1; b < spec.graph.size(); ++b)
                            if (spec.graph.adjacent(a, b)) {
                                if (!first) os << ", ";
                                first = false;
                                os << '[' << quote(spec.names[a]) << ", " << quote(spec.names[b])
                                   << ']';
                            }
                    os << "]\n";
                    break;
                }
                case GroupPairSpec::Kind::Product:
                    os << "type = \"product\"\n";
                    break;
            }
            if (spec.kind == GroupPairSpec::Kind::Product) {
                group(*spec.left, section + ".left");
                emit_peripherals(os, *spec.left, section + ".left");
                group(*spec.right, section + ".right");
                emit_peripherals(os, *spec.right, section + ".right");
                os << "[product]\npairs = [";
                for (std::size_t i = 0; i < spec.product_pairs.size(); ++i)
                    os << (i ? ", " : "") << '[' << spec.product_pairs[i].first << ", "
                       << spec.product_pairs[i].second << ']';
                os << "]\n";
            }
        };
    group(config.pair, "group");
    if (config.pair.kind != GroupPairSpec::Kind::Product)
        emit_peripherals(os, config.pair, "");
    os << "[run]\n";
    os << "command = " << quote(config.command) << "\n";
    os << "radius = " << config.radius << "\n";
    if (config.tau) os << "tau = " << *config.tau << "\n";
    os << "max_dim = " << config.max_dim << "\n";
    if (config.seed) os << "seed = " << *config.seed << "\n";
    os << "cap_vertices = " << config.cap_vertices << "\n";
    os << "format = " << quote(config.format) << "\n";
    if (config.extended) os << "extended = true\n";
    if (!config.relative_generators.empty()) {
        os << "srel = [";
        for (std::size_t i = 0; i < config.relative_generators.size(); ++i)
            os << (i ? ", " : "")
               << quote(format_word(config.relative_generators[i], config.pair.names));
        os << "]\n";
    }
    return os.str();
}

}  // namespace cosetc
