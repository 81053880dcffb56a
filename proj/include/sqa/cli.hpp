#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace sqa {

inline constexpr const char* kToolVersion = "0.1.0";

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(const std::string& text);

/// Entry point of the `sqa` tool. `args[0]` is the program name. Returns 0 on
/// success, 1 for usage or domain errors, 2 for internal errors.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sqa
