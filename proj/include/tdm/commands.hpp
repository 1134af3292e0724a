#pragma once

#include <exception>
#include <ostream>

#include "tdm/config.hpp"
#include "tdm/output.hpp"

namespace tdm::cli {

/// Runs the computation of a command. Progress and warnings go to `log`.
Dataset execute(const RunConfig& config, std::ostream& log);

/// execute() plus output: the dataset goes to config.output_path (with a
/// "<path>.meta.json" sidecar) or to `out` when no path is set. Errors are
/// reported on `log`; the return value is the process exit code.
int run(const RunConfig& config, std::ostream& out, std::ostream& log);

/// 2 usage / invalid request, 3 numerical failure, 4 I/O.
int exit_code(const std::exception& e);

}  // namespace tdm::cli
