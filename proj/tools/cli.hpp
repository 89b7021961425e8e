#pragma once

#include <iosfwd>

namespace blocksel {

/// Entry point of the blocksel command; returns the process exit code
/// (0 ok, 2 usage or I/O, 3 infeasible, 4 numerical failure).
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace blocksel
