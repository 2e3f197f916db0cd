#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "dataecon/config.hpp"

namespace dataecon {

enum ExitCode : int { exit_ok = 0, exit_numerical = 1, exit_usage = 2 };

const std::vector<std::string>& command_names();

// Runs one command, writing artifacts under cfg.out_dir together with the
// echoed config.json.  Errors are reported on `err` and mapped to an exit
// code; nothing is thrown.
int run_command(const RunConfig& cfg, const std::string& command, std::ostream& log, std::ostream& err);

// Maps the exception currently being handled to an exit code and reports it.
int report_current_exception(std::ostream& err);

}  // namespace dataecon
