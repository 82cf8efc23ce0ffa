#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace jpakit::cli {

// Dispatch one command line (without argv[0]). Returns the process exit
// code: 0 success, 2 usage, 3 parse/validation, 4 numerical failure.
// Failures are reported on `err` as one machine-readable JSON line:
//   {"error":{"category":"...","message":"..."}}
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace jpakit::cli
