#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mlm::cli {

/// Runs one mlmsim invocation. Returns the process exit code: 0 success,
/// 1 domain or configuration error, 2 simulation error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mlm::cli
