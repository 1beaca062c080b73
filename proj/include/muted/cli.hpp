#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace muted {

// Exit codes: 0 ok, 1 I/O failure, 2 validation failure or bad usage.
inline constexpr int kExitOk = 0;
inline constexpr int kExitIo = 1;
inline constexpr int kExitValidation = 2;

// `args[0]` is the program name. Errors go to `err` as one JSON object.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace muted
