#pragma once

#include "mdbmlab/report.hpp"

#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace mdbmlab {

/// Exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitUsage = 2 };

/// Raw key/value settings. Keys use underscores (theta_grid, save_stride);
/// vectors are comma-separated.
using Settings = std::map<std::string, std::string>;

/// Parses a config file: either `key = value` lines with `#` comments, or a
/// JSON object (a top-level "config" member is used when present, so the
/// echo written by a previous run can be fed back).
Settings parse_config_text(const std::string& text);

/// Vector setting "0, 1.5,3" -> {0, 1.5, 3}. Throws DomainError on junk.
std::vector<double> parse_number_list(const std::string& text);

/// Full command-line entry point. Normal output goes to `out`, diagnostics
/// to `err`; returns an ExitCode.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mdbmlab
