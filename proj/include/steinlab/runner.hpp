#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "steinlab/json_io.hpp"

namespace steinlab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalidConfig = 1;
inline constexpr int kExitAssertion = 2;

// Entry point of the steinlab tool. Parses flags and the optional JSON config,
// validates everything before touching the output directory, runs the
// experiment and writes results.json, results.csv and plot/*.csv.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// 16 hex digits of the 64-bit FNV-1a hash of the compact dump of `canonical`.
std::string fingerprint(const Json& canonical);

}  // namespace steinlab::cli
