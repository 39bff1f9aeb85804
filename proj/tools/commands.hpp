#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace roadmind::cli {

/// Runs the command line as the `roadmind` binary would and returns its exit
/// status. Machine output goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace roadmind::cli
