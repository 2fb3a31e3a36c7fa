#pragma once

// spectral_lab command line. Callable in-process so tests can check exit
// codes and output without spawning a shell.

#include <iosfwd>
#include <string>
#include <vector>

namespace spectral {

/// `args` excludes the program name. Returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace spectral
