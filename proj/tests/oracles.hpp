// Test-only oracles, independent of the library code paths they check.
#pragma once

#include <cstdint>
#include <vector>

#include "plap/energy.hpp"

namespace oracle {

/// Central finite differences of the discrete energy over free nodes.
plap::Field fd_energy_gradient(const plap::Field& u, const plap::ProblemSpec& ps,
                               double delta);

/// Smallest eigenvalue of a symmetric tridiagonal matrix by Sturm-sequence
/// bisection.
double tridiag_smallest_eigenvalue(const std::vector<double>& diag,
                                   const std::vector<double>& off);

/// First Dirichlet eigenvalue of the 1-D p-Laplacian on (0,1): shooting with
/// RK4 on the first-order system and bisection on the endpoint value.
double shooting_lambda1(double p, int steps = 4000);

/// 2*pi / (p * sin(pi/p)); (p-1)*pi_p^p is the exact first eigenvalue above.
double pi_p(double p);

/// Brute-force connected-component labels of a node mask (queue-based flood
/// fill, reverse scan order).
std::vector<int> flood_fill_labels(const std::vector<std::uint8_t>& mask,
                                   const plap::Grid& g);

/// Relabel by first occurrence so two labelings of the same partition compare
/// equal.
std::vector<int> canonical_labels(const std::vector<int>& labels);

/// Exhaustive minimization of the 5-node Dirichlet energy with 3 free interior
/// values: lattice [0,3] step 0.01, then shrinking local refinement. Energy
/// arithmetic is written out here, independent of the library.
double lattice_min_3interior(double h, double p, double q, double a_value);

}  // namespace oracle
