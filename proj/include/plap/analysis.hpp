#pragma once

#include <vector>

#include "plap/solve.hpp"

namespace plap {

// Reporting threshold for dead-core nodes, relative to the max-norm.
constexpr double kDeadCoreTau = 1e-8;

/// Positivity classification of a nonnegative field.
///
/// Dead-core nodes are those with u <= tau_zero * max(u) (a reporting
/// threshold). Cone membership is exact: the solvers keep iterates in the
/// nonnegative cone and equilibrate genuinely dead regions onto literal
/// zeros, while live tails stay strictly positive however small, so the
/// discrete dichotomy is zero versus positive. in_cone means u > 0 at every
/// free node (interior for Dirichlet, everywhere for Neumann) plus, in the
/// Dirichlet case, a strictly positive inward difference at every boundary
/// node. A magnitude threshold would misclassify thin exponential tails --
/// on strong weights even the principal eigenfunction dips below any fixed
/// relative level.
struct PositivityReport {
    double min_on_positive_set = 0.0;  // min of u over the discrete {a > 0}
    double global_min = 0.0;           // min over free nodes
    std::vector<int> dead_core_nodes;
    bool in_cone = false;
    bool boundary_flux_ok = false;
};

PositivityReport positivity_report(const Field& u, const ProblemSpec& ps,
                                   double tau_zero = kDeadCoreTau);

/// K independently seeded global solves compared pairwise on |u| in the
/// relative max-norm.
struct UniquenessReport {
    std::vector<SolveResult> runs;
    double max_pairwise_distance = 0.0;
    double tolerance = 0.0;
    bool agree = false;
    bool complete = false;  // false if any run failed to converge
};

UniquenessReport multistart_uniqueness(const ProblemSpec& ps, int K,
                                       const SolveOptions& opts,
                                       double tolerance = 1e-4,
                                       const std::vector<std::uint64_t>& seeds = {});

/// Threshold estimate for the exponent above which global minimizers are
/// strictly positive (cone members).
///
/// Bisection on q in a bracket inside (1, p); the classification is checked
/// for monotonicity rather than assumed. If a non-monotone pattern shows up,
/// the routine falls back to an exhaustive scan at step q_tol and reports
/// every probe verbatim.
struct Q0Probe {
    double q = 0.0;
    bool in_cone = false;
    bool converged = false;
    double objective = 0.0;
    double residual = 0.0;
    int iterations = 0;
    double min_on_positive_set = 0.0;
    int dead_core_count = 0;
};

enum class Q0Flag { Bracketed, AlwaysPositive, NeverPositive, NonMonotone };

struct Q0Report {
    double q0 = 0.0;  // largest probed q whose minimizer is not in the cone
    Q0Flag flag = Q0Flag::Bracketed;
    std::vector<Q0Probe> probes;  // sorted by q
};

Q0Report estimate_q0(const Grid& g, const WeightField& w, double p,
                     const SolveOptions& opts, double q_tol,
                     double tau_zero = kDeadCoreTau);

/// Negate u on the support component carrying the given positive-set label.
/// The component must be separated from the rest of supp(u) by dead-core
/// nodes, so the flip changes no cell gradient magnitude with support on
/// live nodes; the flipped field then has the same energy.
Field flip_bump(const Field& u, const WeightField& w, int label,
                const Grid& g, double tau_zero = kDeadCoreTau);

/// Certification chain for a converged nonnegative solve against a
/// constrained reference (the constrained minimizer and its kinetic value,
/// or a restricted pair). For each eps the weighted mass
///   int a |V|^q (u/(u+eps))^(q-1)
/// is compared with the Hoelder bound m^(q/p) kinetic(u)^((p-q)/p); the
/// final test is rayleigh(u, q) <= m (1 + tol).
struct PiconeCertificate {
    struct Step {
        double eps = 0.0;
        double weighted_mass = 0.0;
        double bound = 0.0;
        double slack = 0.0;  // bound - weighted_mass
    };
    std::vector<Step> steps;
    double limit_mass = 0.0;  // mass restricted to the support of u
    double rayleigh_u = 0.0;
    double reference_min = 0.0;
    double final_slack = 0.0;
    bool passed = false;
};

PiconeCertificate certify_by_picone(const SolveResult& solved, const ProblemSpec& ps,
                                    const SolveResult& constrained_ref,
                                    const std::vector<double>& eps_list = {1e-2, 1e-4,
                                                                           1e-6},
                                    double tol = 1e-6,
                                    double tau_zero = kDeadCoreTau);

/// Sweep q toward p and track the global minimizer through the constrained
/// solve: with m the constrained kinetic minimum, the rescaling constant
/// C = m^(1/(q-p)) turns the constrained minimizer into the global one, so
/// sup-norms stay computable when they grow past floating-point comfort.
struct SweepRow {
    double q = 0.0;
    double sup_norm = 0.0;      // max-norm of the global minimizer
    double energy_value = 0.0;  // global minimum of the energy
    bool in_cone = false;
    bool converged = false;
    double residual = 0.0;
    int iterations = 0;
    double min_on_positive_set = 0.0;  // on the rescaled global minimizer
    int dead_core_count = 0;
    Field u;  // the rescaled global minimizer itself
};

enum class Trend { Increasing, Decreasing, Mixed };

struct SweepTable {
    std::vector<SweepRow> rows;
    Trend tail_trend = Trend::Mixed;  // strict trend over the last half
};

SweepTable q_sweep_asymptotics(const Grid& g, const WeightField& w, double p,
                               const std::vector<double>& q_list,
                               const SolveOptions& opts);

}  // namespace plap
