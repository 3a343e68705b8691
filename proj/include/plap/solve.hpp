#pragma once

#include <cstdint>
#include <vector>

#include "plap/energy.hpp"

namespace plap {

enum class InitKind { RandomPositive, GivenField, IndicatorPositiveSet };

struct SolveOptions {
    // Relative tolerances: the projected-gradient max-norm is compared
    // against tol_grad times a stationarity scale (the pre-cancellation
    // gradient magnitude for energy descent, max(1, |objective|) for the
    // quotient modes), together with the last relative objective decrease.
    // When backtracking can no longer register a decrease in double
    // precision, the iterate counts as converged below a documented floor
    // (1e-4 energy / 1e-6 quotient, relative).
    double tol_grad = 1e-8;
    double tol_energy = 1e-12;
    int max_iter = 50000;       // accepted descent steps, all phases combined
    double eps = 1e-8;          // gradient regularization, scaled by field size
    std::uint64_t seed = 1;
    InitKind init = InitKind::RandomPositive;
    Field init_field;  // used when init == GivenField

    // Interleave nodewise equilibration sweeps and closed-form amplitude
    // rescaling between descent phases. These rebuild structure whose
    // objective contribution sits below ulp(objective) (positive tails
    // through strongly negative regions, exact dead nodes) and remove the
    // near-degenerate amplitude modes; plain descent cannot reach either.
    bool equilibrate = true;

    // Test hook: records the objective value of every accepted step.
    std::vector<double>* objective_trace = nullptr;
};

enum class SolveMode { Global, Constrained, Restricted, Eigen };

struct SolveResult {
    Field u;
    double objective = 0.0;  // M, m, m_J or lambda_1 depending on mode
    int iterations = 0;
    bool converged = false;
    double residual = 0.0;
    SolveMode mode = SolveMode::Global;
    // Global mode: converged to a nonnegative objective (minimizer escaped
    // to zero). Neumann quotient modes: converged to a constant field.
    bool suspect_trivial = false;
};

/// Minimize the energy by projected gradient descent on the nonnegative
/// cone (the energy is |u|-invariant, so the minimizer can be taken there)
/// with a Barzilai-Borwein trial step and Armijo backtracking (factor 0.5,
/// slope 1e-4). Tolerances are relative; see SolveOptions.
SolveResult minimize_global(const ProblemSpec& ps, const SolveOptions& opts);

/// Minimize the degree-zero quotient kinetic(u) / (int a|u|^q)^(p/q); the
/// iterate is rescaled onto {int a|u|^q = 1} after every accepted step.
/// The objective is the constrained kinetic minimum.
SolveResult minimize_constrained(const ProblemSpec& ps, const SolveOptions& opts);

/// Constrained minimization with the nodes of every positive-set component
/// not listed in `keep` pinned to zero throughout.
SolveResult minimize_restricted(const ProblemSpec& ps, const std::vector<int>& keep,
                                const SolveOptions& opts);

/// Constrained minimization with exponent p in the constraint: the objective
/// is the principal eigenvalue of the weighted p-Laplacian, the field its
/// eigenfunction on {int a|u|^p = 1}.
SolveResult principal_eigen(const ProblemSpec& ps, const SolveOptions& opts);

/// Discrete Euler-Lagrange defect: max-norm of the energy gradient over
/// free nodes.
double residual(const Field& u, const ProblemSpec& ps, double eps);

}  // namespace plap
