#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace colonist::cli {

/// Exit codes: 0 when every check passes, 1 on a statistical or runtime
/// failure, 2 on a usage or configuration error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace colonist::cli
