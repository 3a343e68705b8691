#pragma once

#include <string>

#include "plap/config.hpp"

namespace plap {

/// Execute one experiment and write its artifacts into out_dir:
///   manifest.txt   resolved config echo (includes the seed)
///   results.csv    one row per solve, fixed header
///   *.dat          field dumps of converged solutions, sweep plot data
/// plus an experiment-specific report file. Returns 0 when every mandated
/// assertion held and all solves converged, 1 otherwise.
int run_experiment(const ExperimentConfig& cfg, const std::string& out_dir,
                   bool quiet);

/// Fixed results.csv header (version 1).
extern const char* const kResultsHeader;

}  // namespace plap
