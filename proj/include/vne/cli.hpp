#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace vne {

// Full command-line surface: args are argv[1..]. Returns the process exit
// status (0 ok, 1 runtime failure, 2 usage error; verify returns 0 only when
// every selected suite passes). Environment variable VNE_SEED overrides the
// default seed wherever a --seed flag exists but was not given.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace vne
