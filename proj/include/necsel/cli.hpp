#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace necsel::cli {

/// Environment variable naming the default output root when --out is omitted.
inline constexpr const char* kOutputRootEnv = "NECSEL_OUTPUT_ROOT";

/// Runs one CLI invocation. `args` excludes the program name. Data goes to
/// `out`, diagnostics to `err`. Exit codes: 0 ok, 1 usage, 2 validation,
/// 3 data, 4 internal invariant violation.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace necsel::cli
