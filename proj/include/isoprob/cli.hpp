#pragma once

// Command-line front end. Machine output (CSV, JSON lines) goes to `out`,
// human-readable text and diagnostics to `err`.

#include <iosfwd>
#include <string>
#include <vector>

namespace isoprob::cli {

/// Exit status: 0 success, 1 numerical or I/O failure, 2 usage or contract error.
/// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace isoprob::cli
