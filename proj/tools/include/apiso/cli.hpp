#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace apiso::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitConfig = 2;

/// Runs one subcommand: norm | kernel | verify-isometry | equimeasure |
/// reconstruct-map | scenario | report. Returns the process exit code.
/// `args` excludes the program name.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace apiso::cli
