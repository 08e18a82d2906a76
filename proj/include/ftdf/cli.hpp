#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ftdf::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitModel = 4;

/// Entry point of the `ftdf` tool; args excludes the program name.
/// Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ftdf::cli
