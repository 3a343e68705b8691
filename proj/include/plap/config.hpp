#pragma once

#include <optional>
#include <string>
#include <vector>

#include "plap/analysis.hpp"

namespace plap {

enum class ExperimentKind {
    Solve,
    Eigen,
    Multistart,
    Q0,
    Sweep,
    Deadcore,
    Restricted,
    Check
};

std::string to_string(ExperimentKind k);

/// One experiment per file. The text format is line-based `key = value`
/// with `#` comments; the full key set is documented in the README.
struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::Solve;

    // problem
    int dim = 1;
    std::array<double, 2> lo{0.0, 0.0};
    std::array<double, 2> hi{1.0, 1.0};
    std::array<int, 2> nodes{0, 1};
    BoundaryMode bc = BoundaryMode::Dirichlet;
    double p = 2.0;
    double q = 0.0;  // unused by eigen; filled per experiment
    std::vector<double> q_list;
    WeightSpec weight;
    std::string weight_file;  // tabulated weights load from a field dump

    // solver
    SolveOptions solver;

    // experiment parameters
    int multistart_k = 20;
    double multistart_tol = 1e-4;
    double q0_tol = 0.01;
    std::vector<int> restricted_labels;

    // output
    bool write_fields = true;

    Grid build() const;             // grid from the problem section
    WeightField weight_on(const Grid& g) const;
};

struct ParseOutcome {
    std::optional<ExperimentConfig> config;
    std::vector<std::string> errors;  // every violation, not just the first
    bool ok() const { return errors.empty() && config.has_value(); }
};

ParseOutcome parse_config(const std::string& text);
ParseOutcome parse_config_file(const std::string& path);

/// Resolved key = value echo of a config (manifest body).
std::string manifest_text(const ExperimentConfig& cfg);

}  // namespace plap
