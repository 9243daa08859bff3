#pragma once

#include <string>
#include <vector>

namespace chs {

// Dispatches to the subcommands {ingest-check, normalize, select, simulate,
// bias, drop, subset-study, dist, synth, report}. argv follows main()
// conventions (argv[0] is the program name). Returns 0 on success, 1 on user
// error, 2 on internal error; diagnostics go to stderr.
int run_cli(const std::vector<std::string>& argv);

}  // namespace chs
