#pragma once

#include <string>
#include <vector>

namespace sslice::cli {

/// Runs `simplex-slice <args...>` (args exclude the program name) and returns
/// the exit code: 0 success, 2 usage, 3 data, 4 numerical, 1 anything else.
int run(const std::vector<std::string>& args);

/// Splices `key=value` lines of a config file into `args` after the
/// subcommand, skipping keys already given as flags.
std::vector<std::string> apply_config(const std::vector<std::string>& args, const std::string& config_text);

std::string fnv1a64_hex(const std::string& bytes);

}  // namespace sslice::cli
