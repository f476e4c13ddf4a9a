#pragma once

// Batch front end: `rwre constants|simulate|verify`. Split from main() so the
// tests can drive it in-process.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace rwre::cli {

inline constexpr const char* kVersion = "1.0.0";

enum Exit : int {
  kOk = 0,
  kParse = 1,
  kEllipticity = 2,
  kDegenerate = 3,
  kConvergence = 4,
  kTestFailure = 5,
  kUnderpowered = 6,
};

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL);

/// Runs one command; returns the process exit code. Diagnostics go to stderr.
int run(const std::vector<std::string>& args);
int run(int argc, char** argv);

}  // namespace rwre::cli
