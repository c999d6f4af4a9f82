#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace treeglc {

/// Runs the command line tool with args (program name excluded). Returns the
/// process exit status: 0 on success, 1 on a library error, 2 on bad usage.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace treeglc
