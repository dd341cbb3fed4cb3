#pragma once

// The tasklaw command line: check, classify, dynamics and fmt.

#include <iosfwd>
#include <string>
#include <vector>

namespace tasklaw::cli {

inline constexpr const char* kSchema = "tasklaw.report/1";
inline constexpr const char* kEngineVersion = "1.0.0";

enum Exit : int { kOk = 0, kRefuted = 1, kInputError = 2 };

/// Runs one invocation; `args` excludes the program name. Reports go to
/// `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tasklaw::cli
