#pragma once

#include <string>
#include <vector>

namespace laserguide::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

/// Entry point of the `laserguide` tool. Diagnostics go to stderr as
/// `level: code: message`.
int cli_main(int argc, const char* const* argv);
int cli_main(const std::vector<std::string>& args);

}  // namespace laserguide::cli
