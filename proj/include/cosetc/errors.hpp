#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace cosetc {

// Malformed input data: bad letters, unparsable words, inconsistent specs.
struct MalformedError : std::runtime_error {
    explicit MalformedError(const std::string& what) : std::runtime_error(what) {}
};

// A backend was asked for a query it does not support (wrong hypotheses,
// unsupported arity, missing capability flag).
struct CapabilityError : std::runtime_error {
    explicit CapabilityError(const std::string& what) : std::runtime_error(what) {}
};

// A configured cap (states, vertices, components) was exceeded.  Callers must
// treat this as "no answer", never as a verdict.
struct ResourceLimitError : std::runtime_error {
    explicit ResourceLimitError(const std::string& what) : std::runtime_error(what) {}
};

// A documented precondition was violated by the caller.
struct PreconditionError : std::logic_error {
    explicit PreconditionError(const std::string& what) : std::logic_error(what) {}
};

// Invalid run configuration; carries the full list of violations.
struct ConfigError : std::runtime_error {
    std::vector<std::string> violations;
    explicit ConfigError(std::vector<std::string> errs)
        : std::runtime_error(join(errs)), violations(std::move(errs)) {}

  private:
    static std::string join(const std::vector<std::string>& errs) {
        std::string out = "invalid config:";
        for (const auto& e : errs) {
            out += "\n  - ";
            out += e;
        }
        return out;
    }
};

}  // namespace cosetc
