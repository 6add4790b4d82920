#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "dufs/gradcheck.hpp"

namespace dufs {

/// Injection points for tests.
struct CliHooks {
  GradientFn gradient = loss_gradient;  // used by `gradcheck`
};

/// Runs one command line (without the program name). Returns the process
/// exit code: 0 success, 1 numerical or check failure, 2 input error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
            const CliHooks& hooks = {});

}  // namespace dufs
