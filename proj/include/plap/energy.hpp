#pragma once

#include <span>
#include <vector>

#include "plap/grid.hpp"
#include "plap/weight.hpp"

namespace plap {

/// Discrete problem bundle: the energy
///   E(u) = (1/p) * int |grad u|^p  -  (1/q) * int a(x) |u|^q
/// on the given grid with p > 1 and q in [1, p]. Solvers additionally
/// require 1 < q < p; q == p is the eigenvalue regime and q == 1 is only
/// meaningful for inequality checks.
struct ProblemSpec {
    Grid grid;
    WeightField weight;
    double p = 2.0;
    double q = 1.5;
};

ProblemSpec make_problem(Grid g, WeightField w, double p, double q);

struct EnergyBreakdown {
    double kinetic = 0.0;    // int |grad u|^p
    double potential = 0.0;  // int a |u|^q
    double total = 0.0;      // kinetic/p - potential/q
};

EnergyBreakdown energy(const Field& u, const ProblemSpec& ps);

/// Exact gradient of the discrete energy. The factor |grad u|^(p-2) is
/// evaluated with |grad u| replaced by sqrt(|grad u|^2 + eps^2); eps never
/// enters the energy value itself. Dirichlet boundary entries are zeroed.
/// Requires q > 1. With eps == 0, p < 2 and a zero-gradient cell the
/// p-Laplacian weight degenerates and the call fails.
Field energy_gradient(const Field& u, const ProblemSpec& ps, double eps);

/// Building blocks of the gradient, shared with the quotient solvers.
/// kinetic part: (1/p) d/du of int |grad u|^p (eps-regularized weight);
/// potential part: (1/r) d/du of int a|u|^r, entries W_j a_j |u_j|^(r-2) u_j.
/// Neither applies boundary zeroing.
Field kinetic_gradient_part(const Field& u, const ProblemSpec& ps, double eps);
Field potential_gradient_part(const Field& u, const ProblemSpec& ps, double r);

/// int a |u|^r (r defaults to q).
double constraint_value(const Field& u, const ProblemSpec& ps);
double constraint_value(const Field& u, const ProblemSpec& ps, double r);

/// Scale u onto the constraint manifold {int a|u|^q = 1}; requires a
/// positive constraint value.
Field project_to_Sa(const Field& u, const ProblemSpec& ps);

/// kinetic(u) / (int a|u|^r)^(p/r) for r in {q, p}. Degree-zero homogeneous.
/// Its infimum is the constrained kinetic minimum for r == q and the
/// principal eigenvalue for r == p.
double rayleigh(const Field& u, const ProblemSpec& ps, double r);

/// Cellwise slack of the generalized Picone inequality
///   |grad(u+eps)|^(p-2) grad(u+eps) . grad(v^q/(u+eps)^(q-1))
///     <= |grad(u+eps)|^(p-q) |grad v|^q
/// for u, v >= 0. The test field v^q/(u+eps)^(q-1) is formed nodewise
/// before differencing. Returns right side minus left side per cell.
std::vector<double> picone_gap(const Field& u, const Field& v,
                               const ProblemSpec& ps, double eps);

/// Slack of the vector inequality
///   |a1^(q-1) e1 + a2^(q-1) e2|^p <= 2^(p/q-1) (|e1|^p + |e2|^p)
/// for a1, a2 in [0,1] with a1^q + a2^q = 1 and q in [1,p]. Nonnegative,
/// zero only when a1 == a2 or both vectors vanish.
double hidden_convexity_gap(double a1, double a2, std::span<const double> e1,
                            std::span<const double> e2, double p, double q);

}  // namespace plap
