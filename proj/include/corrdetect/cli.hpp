#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace corrdetect {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitVerifyFailed = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitRuntime = 3;

// Entry point of the `corrdetect` executable; args excludes the program name.
// Machine-readable output goes to `out` (or --output), the human summary and
// progress lines to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace corrdetect
