#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tabeval::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFatal = 1;
inline constexpr int kExitPartial = 2;

// Entry point of the tabeval tool; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace tabeval::cli
