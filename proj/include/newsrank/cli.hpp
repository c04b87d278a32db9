#pragma once

#include <string>
#include <vector>

namespace newsrank::cli {

/// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kUsage = 1;
inline constexpr int kDataError = 2;
inline constexpr int kNumericError = 3;

int run(int argc, char** argv);
/// args excludes the program name.
int run(const std::vector<std::string>& args);

}  // namespace newsrank::cli
