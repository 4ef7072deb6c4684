#pragma once

#include <stdexcept>
#include <string>

namespace nok {

// Error taxonomy, mirrored by the CLI exit codes:
//   input_error    -> exit 1  (malformed workspace, unknown names)
//   math_error     -> exit 2  (precondition failures: not pseudoeffective,
//                              flag not admissible, undetermined local data)
//   internal_error -> exit 3  (a certified invariant failed to re-verify)

struct input_error : std::runtime_error {
    explicit input_error(const std::string& msg) : std::runtime_error(msg) {}
};

struct math_error : std::runtime_error {
    explicit math_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Local data is insufficient to decide point sharing; never guessed silently.
struct undetermined_error : math_error {
    explicit undetermined_error(const std::string& msg) : math_error(msg) {}
};

struct internal_error : std::logic_error {
    explicit internal_error(const std::string& msg) : std::logic_error(msg) {}
};

} // namespace nok
