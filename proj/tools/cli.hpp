#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ecgm::cli {

/// Runs one invocation. `args` excludes the program name.
/// Returns 0 on success, 1 on a domain failure (a FAIL verdict, a bad
/// resistor, an I/O or data error), 2 on a usage error.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace ecgm::cli
