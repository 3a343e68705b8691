#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "plap/solve.hpp"

using namespace plap;

namespace {

WeightField piecewise(const Grid& g, std::vector<double> breaks,
                      std::vector<double> vals) {
    WeightSpec spec;
    spec.kind = WeightSpec::Kind::PiecewiseIntervals;
    spec.breakpoints = std::move(breaks);
    spec.interval_values = std::move(vals);
    return evaluate_weight(spec, g);
}

WeightField constant_weight(const Grid& g, double value) {
    return weight_from_values(
        std::vector<double>(static_cast<std::size_t>(g.node_count()), value), g);
}

// Two positive fringes around a strongly negative middle.
ProblemSpec two_bump_problem(int nodes, double mid, double p, double q) {
    Grid g = grid_1d(0.0, 1.0, nodes, BoundaryMode::Dirichlet);
    WeightField w = piecewise(g, {0.1, 0.9}, {1.0, mid, 1.0});
    return make_problem(std::move(g), std::move(w), p, q);
}

// Mild sign-changing test problem that converges quickly.
ProblemSpec split_problem(int nodes, double p, double q) {
    Grid g = grid_1d(0.0, 1.0, nodes, BoundaryMode::Dirichlet);
    WeightField w = piecewise(g, {0.55}, {2.0, -1.0});
    return make_problem(std::move(g), std::move(w), p, q);
}

}  // namespace

TEST_CASE("two-bump problem: negative minimum with a nonnegative minimizer") {
    const ProblemSpec ps = two_bump_problem(201, -10.0, 2.0, 1.5);
    SolveOptions opts;
    const SolveResult r = minimize_global(ps, opts);
    CHECK(r.converged);
    CHECK(r.objective < 0.0);
    CHECK_FALSE(r.suspect_trivial);
    for (double v : r.u.values) CHECK(v >= 0.0);
    CHECK(r.u[0] == 0.0);
    CHECK(r.u[200] == 0.0);
}

TEST_CASE("nonpositive weight: minimizer escapes to zero and is flagged") {
    Grid g = grid_1d(0.0, 1.0, 41, BoundaryMode::Dirichlet);
    const ProblemSpec ps = make_problem(g, constant_weight(g, -1.0), 2.0, 1.5);
    SolveOptions opts;
    opts.max_iter = 3000;
    const SolveResult r = minimize_global(ps, opts);
    CHECK(r.objective >= 0.0);
    CHECK(r.suspect_trivial);
    CHECK(energy(r.u, ps).total < 1e-6);  // descent died toward the zero field
}

TEST_CASE("solver minimum matches the exhaustive lattice oracle") {
    Grid g = grid_1d(0.0, 1.0, 5, BoundaryMode::Dirichlet);
    const ProblemSpec ps = make_problem(g, constant_weight(g, 1.0), 2.0, 1.5);
    SolveOptions opts;
    const SolveResult r = minimize_global(ps, opts);
    const double oracle = oracle::lattice_min_3interior(g.spacing[0], 2.0, 1.5, 1.0);
    CHECK(r.converged);
    CHECK(r.objective < 0.0);
    CHECK(oracle < 0.0);
    CHECK(std::abs(r.objective - oracle) <= 1e-3);
    CHECK(std::abs(r.objective - oracle) <= 1e-9);  // measured headroom
}

TEST_CASE("constrained minimizer sits on the manifold with m > 0") {
    const ProblemSpec ps = two_bump_problem(101, -10.0, 2.0, 1.5);
    SolveOptions opts;
    const SolveResult r = minimize_constrained(ps, opts);
    CHECK(r.objective > 0.0);
    CHECK(constraint_value(r.u, ps) == doctest::Approx(1.0).epsilon(1e-10));
    for (double v : r.u.values) CHECK(v >= 0.0);
}

TEST_CASE("projected global minimizer attains the constrained minimum") {
    const ProblemSpec ps = split_problem(161, 2.0, 1.5);
    SolveOptions opts;
    const SolveResult g = minimize_global(ps, opts);
    const SolveResult c = minimize_constrained(ps, opts);
    REQUIRE(g.converged);
    REQUIRE(c.converged);
    const Field proj = project_to_Sa(g.u, ps);
    CHECK(rayleigh(proj, ps, ps.q) ==
          doctest::Approx(c.objective).epsilon(1e-6));
}

TEST_CASE("energy identity and rescaling link the two solvers") {
    const ProblemSpec ps = split_problem(161, 2.5, 1.4);
    SolveOptions opts;
    const SolveResult g = minimize_global(ps, opts);
    const SolveResult c = minimize_constrained(ps, opts);
    REQUIRE(g.converged);
    REQUIRE(c.converged);

    const double predicted = (1.0 / ps.p - 1.0 / ps.q) *
                             std::pow(c.objective, ps.q / (ps.q - ps.p));
    CHECK(std::abs(g.objective - predicted) <= 1e-3 * std::abs(g.objective));

    Field scaled = c.u;
    const double C = std::pow(c.objective, 1.0 / (ps.q - ps.p));
    for (double& v : scaled.values) v *= C;
    CHECK(energy(scaled, ps).total ==
          doctest::Approx(g.objective).epsilon(1e-6));
}

TEST_CASE("restricted solve with every component matches the constrained one") {
    const ProblemSpec ps = two_bump_problem(101, -5.0, 2.0, 1.5);
    REQUIRE(ps.weight.n_components == 2);
    SolveOptions opts;
    const SolveResult full = minimize_constrained(ps, opts);
    const SolveResult both = minimize_restricted(ps, {1, 2}, opts);
    CHECK(both.objective == doctest::Approx(full.objective).epsilon(1e-6));
}

TEST_CASE("restricted solve pins the excluded component and cannot beat m") {
    const ProblemSpec ps = two_bump_problem(101, -5.0, 2.0, 1.5);
    SolveOptions opts;
    const SolveResult full = minimize_constrained(ps, opts);
    const SolveResult left = minimize_restricted(ps, {1}, opts);

    for (int n = 0; n < ps.grid.node_count(); ++n)
        if (ps.weight.labels[static_cast<std::size_t>(n)] == 2)
            CHECK(left.u[n] == 0.0);
    CHECK(left.objective >= full.objective - 1e-6 * full.objective);
    CHECK(constraint_value(left.u, ps) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("mirror symmetry: both single-bump restrictions agree") {
    // Breakpoints between nodes keep the discretized weight grid-symmetric.
    Grid g = grid_1d(0.0, 1.0, 101, BoundaryMode::Dirichlet);
    const ProblemSpec ps =
        make_problem(g, piecewise(g, {0.095, 0.905}, {1.0, -5.0, 1.0}), 2.0, 1.5);
    SolveOptions opts;
    const SolveResult left = minimize_restricted(ps, {1}, opts);
    const SolveResult right = minimize_restricted(ps, {2}, opts);
    CHECK(left.objective == doctest::Approx(right.objective).epsilon(1e-6));

    // The reflected left field is feasible for the right restriction and
    // reproduces its kinetic value.
    Field mirrored = left.u;
    std::reverse(mirrored.values.begin(), mirrored.values.end());
    CHECK(rayleigh(mirrored, ps, ps.q) ==
          doctest::Approx(right.objective).epsilon(1e-6));
}

TEST_CASE("restricted solve validates its component set") {
    const ProblemSpec ps = two_bump_problem(41, -5.0, 2.0, 1.5);
    SolveOptions opts;
    CHECK_THROWS_AS(minimize_restricted(ps, {}, opts), std::invalid_argument);
    CHECK_THROWS_AS(minimize_restricted(ps, {7}, opts), std::invalid_argument);
}

TEST_CASE("principal eigenvalue of the Dirichlet Laplacian on (0,1)") {
    Grid g = grid_1d(0.0, 1.0, 201, BoundaryMode::Dirichlet);
    const ProblemSpec ps = make_problem(g, constant_weight(g, 1.0), 2.0, 2.0);
    SolveOptions opts;
    const SolveResult r = principal_eigen(ps, opts);
    REQUIRE(r.converged);

    const double pi2 = std::numbers::pi * std::numbers::pi;
    CHECK(std::abs(r.objective - pi2) / pi2 < 0.005);

    // Dense tridiagonal oracle gives the exact discrete eigenvalue.
    const int m = g.node_count() - 2;
    const double h = g.spacing[0];
    std::vector<double> diag(static_cast<std::size_t>(m), 2.0 / (h * h));
    std::vector<double> off(static_cast<std::size_t>(m - 1), -1.0 / (h * h));
    const double lam = oracle::tridiag_smallest_eigenvalue(diag, off);
    CHECK(r.objective == doctest::Approx(lam).epsilon(1e-6));

    // Constraint normalization and a positive eigenfunction.
    CHECK(constraint_value(r.u, ps, ps.p) == doctest::Approx(1.0).epsilon(1e-10));
    for (int n = 1; n + 1 < g.node_count(); ++n) CHECK(r.u[n] > 0.0);
}

TEST_CASE("p = 3 eigenvalue matches the shooting oracle") {
    const double p = 3.0;
    const double closed_form = (p - 1.0) * std::pow(oracle::pi_p(p), p);
    const double shot = oracle::shooting_lambda1(p);
    CHECK(std::abs(shot - closed_form) / closed_form < 1e-4);

    Grid g = grid_1d(0.0, 1.0, 201, BoundaryMode::Dirichlet);
    const ProblemSpec ps = make_problem(g, constant_weight(g, 1.0), p, p);
    SolveOptions opts;
    const SolveResult r = principal_eigen(ps, opts);
    REQUIRE(r.converged);
    CHECK(std::abs(r.objective - closed_form) / closed_form < 0.01);
    CHECK(std::abs(r.objective - shot) / shot < 0.01);
}

TEST_CASE("eigenvalue scales inversely with the weight") {
    Grid g = grid_1d(0.0, 1.0, 201, BoundaryMode::Dirichlet);
    SolveOptions opts;
    const SolveResult r1 =
        principal_eigen(make_problem(g, constant_weight(g, 1.0), 2.0, 2.0), opts);
    const SolveResult r4 =
        principal_eigen(make_problem(g, constant_weight(g, 4.0), 2.0, 2.0), opts);
    CHECK(r1.objective / r4.objective == doctest::Approx(4.0).epsilon(1e-6));
}

TEST_CASE("euler-lagrange residual") {
    const ProblemSpec ps = split_problem(81, 2.0, 1.5);
    CHECK(residual(make_field(ps.grid), ps, 1e-8) == 0.0);

    SolveOptions opts;
    const SolveResult r = minimize_global(ps, opts);
    REQUIRE(r.converged);
    CHECK(residual(r.u, ps, 1e-8) <= 1e-6);

    Field off = r.u;
    off[40] += 0.1;
    CHECK(residual(off, ps, 1e-8) > 1e-6);
}

TEST_CASE("descent is monotone across accepted steps") {
    const ProblemSpec ps = split_problem(81, 2.0, 1.5);
    std::vector<double> trace;
    SolveOptions opts;
    opts.objective_trace = &trace;
    opts.equilibrate = false;  // a single uninterrupted descent phase
    minimize_global(ps, opts);
    REQUIRE(trace.size() > 10);
    for (std::size_t k = 1; k < trace.size(); ++k) CHECK(trace[k] <= trace[k - 1]);
}

TEST_CASE("identical options reproduce the solve bit for bit") {
    const ProblemSpec ps = split_problem(81, 2.2, 1.6);
    SolveOptions opts;
    opts.seed = 42;
    const SolveResult a = minimize_global(ps, opts);
    const SolveResult b = minimize_global(ps, opts);
    CHECK(a.objective == b.objective);
    CHECK(a.iterations == b.iterations);
    CHECK(a.residual == b.residual);
    CHECK(a.u.values == b.u.values);
}

TEST_CASE("neumann solves require a negative weight integral") {
    Grid g = grid_1d(0.0, 1.0, 41, BoundaryMode::Neumann);
    const ProblemSpec bad = make_problem(g, piecewise(g, {0.5}, {1.0, -0.5}), 2.0, 1.5);
    SolveOptions opts;
    CHECK_THROWS_AS(minimize_global(bad, opts), std::invalid_argument);
    CHECK_THROWS_AS(minimize_constrained(bad, opts), std::invalid_argument);

    const ProblemSpec ok = make_problem(g, piecewise(g, {0.4}, {1.0, -2.0}), 2.0, 1.5);
    const SolveResult r = minimize_global(ok, opts);
    CHECK(r.converged);
    CHECK(r.objective < 0.0);
}

TEST_CASE("subhomogeneity is enforced for energy solves") {
    Grid g = grid_1d(0.0, 1.0, 41, BoundaryMode::Dirichlet);
    const ProblemSpec eigenish = make_problem(g, constant_weight(g, 1.0), 2.0, 2.0);
    SolveOptions opts;
    CHECK_THROWS_AS(minimize_global(eigenish, opts), std::invalid_argument);
    CHECK_NOTHROW(principal_eigen(eigenish, opts));
}
