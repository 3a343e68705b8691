#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "plap/energy.hpp"

using namespace plap;

namespace {

WeightField unit_weight(const Grid& g, double value = 1.0) {
    return weight_from_values(
        std::vector<double>(static_cast<std::size_t>(g.node_count()), value), g);
}

Field random_field(const Grid& g, std::mt19937& rng, double lo, double hi,
                   bool admissible) {
    std::uniform_real_distribution<double> dist(lo, hi);
    Field u = make_field(g);
    for (int n = 0; n < g.node_count(); ++n) u[n] = dist(rng);
    return admissible ? enforce_boundary(u, g) : u;
}

}  // namespace

TEST_CASE("energy of the zero field vanishes") {
    const Grid g = grid_1d(0.0, 1.0, 9, BoundaryMode::Dirichlet);
    const ProblemSpec ps = make_problem(g, unit_weight(g), 2.0, 1.5);
    const EnergyBreakdown e = energy(make_field(g), ps);
    CHECK(e.kinetic == 0.0);
    CHECK(e.potential == 0.0);
    CHECK(e.total == 0.0);
}

TEST_CASE("constant field in Neumann mode: pure potential") {
    const Grid g = grid_1d(0.0, 1.0, 11, BoundaryMode::Neumann);
    const ProblemSpec ps = make_problem(g, unit_weight(g, -1.0), 2.0, 1.5);
    const EnergyBreakdown e = energy(make_field(g, 1.0), ps);
    CHECK(e.kinetic == 0.0);
    CHECK(e.potential == doctest::Approx(-1.0));
    CHECK(e.total == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("kinetic and potential scale with degree p and q") {
    std::mt19937 rng(3);
    const Grid g = grid_2d(0.0, 1.0, 7, 0.0, 1.0, 6, BoundaryMode::Dirichlet);
    const ProblemSpec ps = make_problem(g, unit_weight(g), 2.5, 1.7);
    const Field u = random_field(g, rng, 0.2, 1.2, true);
    Field tu = u;
    for (double& v : tu.values) v *= 2.0;
    const EnergyBreakdown e1 = energy(u, ps), e2 = energy(tu, ps);
    CHECK(e2.kinetic ==
          doctest::Approx(std::pow(2.0, ps.p) * e1.kinetic).epsilon(1e-12));
    CHECK(e2.potential ==
          doctest::Approx(std::pow(2.0, ps.q) * e1.potential).epsilon(1e-12));
    CHECK(e1.total ==
          doctest::Approx(e1.kinetic / ps.p - e1.potential / ps.q).epsilon(1e-14));
}

TEST_CASE("energy(|u|) == energy(u) for node-aligned sign changes") {
    std::mt19937 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const bool two_d = trial % 2 == 0;
        const Grid g = two_d ? grid_2d(0.0, 1.0, 8, 0.0, 1.0, 6, BoundaryMode::Neumann)
                             : grid_1d(0.0, 1.0, 25, BoundaryMode::Neumann);
        const ProblemSpec ps = make_problem(g, unit_weight(g, -0.5), 2.3, 1.4);
        Field u = random_field(g, rng, 0.3, 1.3, false);
        std::uniform_int_distribution<int> pick(1, g.nodes[0] - 2);
        const int cut = pick(rng);
        for (int n = 0; n < g.node_count(); ++n) {
            const int i = g.dim == 1 ? n : n / g.nodes[1];
            if (i == cut) u[n] = 0.0;
            if (i > cut) u[n] = -u[n];
        }
        Field au = u;
        for (double& v : au.values) v = std::abs(v);
        const EnergyBreakdown eu = energy(u, ps), ea = energy(au, ps);
        CHECK(eu.kinetic == doctest::Approx(ea.kinetic).epsilon(1e-14));
        CHECK(eu.potential == doctest::Approx(ea.potential).epsilon(1e-14));
    }
}

TEST_CASE("gradient vanishes at the zero field") {
    const Grid g = grid_1d(0.0, 1.0, 9, BoundaryMode::Dirichlet);
    const ProblemSpec ps = make_problem(g, unit_weight(g), 2.0, 1.5);
    const Field grad = energy_gradient(make_field(g), ps, 0.0);
    for (double v : grad.values) CHECK(v == 0.0);
}

TEST_CASE("kinetic gradient is linear for p = 2") {
    std::mt19937 rng(11);
    const Grid g = grid_1d(0.0, 1.0, 13, BoundaryMode::Dirichlet);
    const ProblemSpec ps = make_problem(g, unit_weight(g), 2.0, 1.5);
    const Field a = random_field(g, rng, -1.0, 1.0, true);
    const Field b = random_field(g, rng, -1.0, 1.0, true);
    Field sum = a;
    for (int n = 0; n < g.node_count(); ++n) sum[n] += b[n];
    const Field ga = kinetic_gradient_part(a, ps, 0.0);
    const Field gb = kinetic_gradient_part(b, ps, 0.0);
    const Field gs = kinetic_gradient_part(sum, ps, 0.0);
    for (int n = 0; n < g.node_count(); ++n)
        CHECK(gs[n] == doctest::Approx(ga[n] + gb[n]).epsilon(1e-13));
}

TEST_CASE("analytic gradient matches central differences") {
    std::mt19937 rng(17);
    struct Case {
        int dim;
        double p, q;
        BoundaryMode bc;
    };
    const Case cases[] = {{1, 2.5, 1.5, BoundaryMode::Dirichlet},
                          {1, 1.5, 1.2, BoundaryMode::Neumann},
                          {2, 3.0, 1.8, BoundaryMode::Dirichlet},
                          {2, 2.0, 1.5, BoundaryMode::Neumann}};
    for (const Case& c : cases) {
        const Grid g = c.dim == 1 ? grid_1d(0.0, 1.0, 21, c.bc)
                                  : grid_2d(0.0, 1.0, 8, 0.0, 1.0, 7, c.bc);
        std::vector<double> avals(static_cast<std::size_t>(g.node_count()));
        std::uniform_real_distribution<double> adist(-2.0, 2.0);
        for (double& v : avals) v = adist(rng);
        const ProblemSpec ps = make_problem(g, weight_from_values(avals, g), c.p, c.q);

        const Field u = random_field(g, rng, 0.5, 1.5, true);
        const Field an = energy_gradient(u, ps, 1e-8);
        const Field fd = oracle::fd_energy_gradient(u, ps, 1e-6);
        int checked = 0;
        for (int n = 0; n < g.node_count(); ++n) {
            if (g.bc == BoundaryMode::Dirichlet && g.is_boundary(n)) {
                CHECK(an[n] == 0.0);
                continue;
            }
            const double rel = std::abs(fd[n] - an[n]) /
                               std::max({std::abs(fd[n]), std::abs(an[n]), 1e-8});
            CHECK(rel <= 1e-5);
            ++checked;
        }
        CHECK(checked >= 19);
    }
}

TEST_CASE("spec example: 5-node grid, p = 2.5, q = 1.5") {
    std::mt19937 rng(23);
    const Grid g = grid_1d(0.0, 1.0, 5, BoundaryMode::Dirichlet);
    const ProblemSpec ps = make_problem(g, unit_weight(g), 2.5, 1.5);
    const Field u = random_field(g, rng, 0.5, 1.5, true);
    const Field an = energy_gradient(u, ps, 1e-8);
    const Field fd = oracle::fd_energy_gradient(u, ps, 1e-6);
    for (int n = 1; n + 1 < g.node_count(); ++n)
        CHECK(an[n] == doctest::Approx(fd[n]).epsilon(1e-6));
}

TEST_CASE("degenerate p < 2 weight without regularization is an error") {
    const Grid g = grid_1d(0.0, 1.0, 5, BoundaryMode::Dirichlet);
    const ProblemSpec ps = make_problem(g, unit_weight(g), 1.5, 1.2);
    Field flat = make_field(g);
    flat[2] = 0.0;  // zero field: every cell gradient vanishes
    CHECK_THROWS_AS(energy_gradient(flat, ps, 0.0), std::domain_error);
    CHECK_NOTHROW(energy_gradient(flat, ps, 1e-8));
}

TEST_CASE("q == 1 is rejected by the gradient") {
    const Grid g = grid_1d(0.0, 1.0, 5, BoundaryMode::Dirichlet);
    const ProblemSpec ps = make_problem(g, unit_weight(g), 2.0, 1.0);
    CHECK_THROWS_AS(energy_gradient(make_field(g, 1.0), ps, 1e-8),
                    std::invalid_argument);
}

TEST_CASE("constraint value and its q-homogeneity") {
    std::mt19937 rng(31);
    const Grid g = grid_1d(0.0, 1.0, 17, BoundaryMode::Neumann);
    const ProblemSpec ps = make_problem(g, unit_weight(g), 2.0, 1.5);
    CHECK(constraint_value(make_field(g), ps) == 0.0);
    CHECK(constraint_value(make_field(g, 1.0), ps) == doctest::Approx(1.0));

    const Field u = random_field(g, rng, -1.0, 1.0, false);
    Field tu = u;
    for (double& v : tu.values) v *= 3.0;
    CHECK(constraint_value(tu, ps) ==
          doctest::Approx(std::pow(3.0, ps.q) * constraint_value(u, ps))
              .epsilon(1e-13));
}

TEST_CASE("projection onto the constraint manifold") {
    const Grid g = grid_1d(0.0, 1.0, 9, BoundaryMode::Neumann);
    // q = 4 with constraint 16 scales by exactly 1/2.
    const ProblemSpec ps = make_problem(g, unit_weight(g), 5.0, 4.0);
    const Field u = make_field(g, 2.0);
    CHECK(constraint_value(u, ps) == doctest::Approx(16.0));
    const Field proj = project_to_Sa(u, ps);
    for (double v : proj.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(constraint_value(proj, ps) == doctest::Approx(1.0).epsilon(1e-12));

    // Already on the manifold: projection is the identity up to rounding.
    const Field again = project_to_Sa(proj, ps);
    for (int n = 0; n < g.node_count(); ++n)
        CHECK(again[n] == doctest::Approx(proj[n]).epsilon(1e-14));

    const ProblemSpec neg = make_problem(g, unit_weight(g, -1.0), 5.0, 4.0);
    CHECK_THROWS_AS(project_to_Sa(u, neg), std::invalid_argument);
}

TEST_CASE("rayleigh quotient: scale invariance and manifold identity") {
    std::mt19937 rng(37);
    const Grid g = grid_1d(0.0, 1.0, 33, BoundaryMode::Dirichlet);
    const ProblemSpec ps = make_problem(g, unit_weight(g), 2.5, 1.5);
    const Field u = random_field(g, rng, 0.5, 1.5, true);

    for (double r : {ps.q, ps.p}) {
        Field tu = u;
        for (double& v : tu.values) v *= 5.0;
        CHECK(rayleigh(tu, ps, r) ==
              doctest::Approx(rayleigh(u, ps, r)).epsilon(1e-12));
    }

    const Field on_manifold = project_to_Sa(u, ps);
    CHECK(rayleigh(on_manifold, ps, ps.q) ==
          doctest::Approx(energy(on_manifold, ps).kinetic).epsilon(1e-12));

    // Invariant: rayleigh(u, q) equals the kinetic value after projection.
    for (int trial = 0; trial < 25; ++trial) {
        const Field v = random_field(g, rng, 0.1, 1.1, true);
        CHECK(rayleigh(v, ps, ps.q) ==
              doctest::Approx(energy(project_to_Sa(v, ps), ps).kinetic)
                  .epsilon(1e-12));
    }

    CHECK_THROWS_AS(rayleigh(u, ps, 1.7), std::invalid_argument);
}

TEST_CASE("sampled sine reproduces the Laplace eigenvalue and the oracle") {
    const Grid g = grid_1d(0.0, 1.0, 401, BoundaryMode::Dirichlet);
    const ProblemSpec ps = make_problem(g, unit_weight(g), 2.0, 1.5);
    Field u = make_field(g);
    for (int n = 0; n < g.node_count(); ++n)
        u[n] = std::sin(std::numbers::pi * g.coord(0, n));
    const double quotient = rayleigh(u, ps, ps.p);
    const double pi2 = std::numbers::pi * std::numbers::pi;
    CHECK(std::abs(quotient - pi2) / pi2 < 0.005);

    // Dense tridiagonal oracle: interior stiffness/mass pencil.
    const int m = g.node_count() - 2;
    const double h = g.spacing[0];
    std::vector<double> diag(static_cast<std::size_t>(m), 2.0 / (h * h));
    std::vector<double> off(static_cast<std::size_t>(m - 1), -1.0 / (h * h));
    const double lam = oracle::tridiag_smallest_eigenvalue(diag, off);
    CHECK(std::abs(lam - pi2) / pi2 < 0.005);
    CHECK(quotient >= lam * (1.0 - 1e-12));  // sampled sine cannot beat the minimum
}

TEST_CASE("picone gap: equality case and constant test field") {
    const Grid g = grid_1d(0.0, 1.0, 21, BoundaryMode::Neumann);
    const ProblemSpec ps = make_problem(g, unit_weight(g), 3.0, 2.0);
    std::mt19937 rng(41);
    const Field u = random_field(g, rng, 0.2, 1.2, false);
    const double eps = 1e-3;

    Field v = u;
    for (double& x : v.values) x += eps;  // v = u + eps telescopes exactly
    for (double gap : picone_gap(u, v, ps, eps))
        CHECK(gap == doctest::Approx(0.0).epsilon(1e-12));

    const Field c = make_field(g, 0.7);
    for (double gap : picone_gap(u, c, ps, eps)) CHECK(gap >= 0.0);
}

TEST_CASE("picone gap sweep stays above the discretization tolerance") {
    const Grid g = grid_1d(0.0, 1.0, 21, BoundaryMode::Neumann);
    const ProblemSpec ps = make_problem(g, unit_weight(g), 3.0, 2.0);
    std::mt19937 rng(43);
    double min_gap = 1e300;
    for (int trial = 0; trial < 1000; ++trial) {
        const Field u = random_field(g, rng, 0.2, 1.2, false);
        const Field v = random_field(g, rng, 0.2, 1.2, false);
        for (double gap : picone_gap(u, v, ps, 1e-3)) min_gap = std::min(min_gap, gap);
    }
    CHECK(min_gap >= -1e-8);

    Field neg = make_field(g, 1.0);
    neg[3] = -0.1;
    CHECK_THROWS_AS(picone_gap(neg, make_field(g, 1.0), ps, 1e-3),
                    std::invalid_argument);
}

TEST_CASE("hidden convexity gap: equality and strictness") {
    const double q = 1.3, p = 2.7;
    const double a = std::pow(0.5, 1.0 / q);
    const double eta[2] = {0.4, -0.8};
    CHECK(hidden_convexity_gap(a, a, eta, eta, p, q) ==
          doctest::Approx(0.0).epsilon(1e-12));

    const double zero[2] = {0.0, 0.0};
    CHECK(hidden_convexity_gap(a, a, zero, zero, p, q) == 0.0);

    // alpha_1 != alpha_2 with nonvanishing vectors: strictly positive.
    const double a1 = std::pow(0.9, 1.0 / q);
    const double a2 = std::pow(0.1, 1.0 / q);
    const double e1[2] = {1.0, 0.0};
    const double e2[2] = {0.0, 1.0};
    CHECK(hidden_convexity_gap(a1, a2, e1, e2, p, q) > 0.0);

    CHECK_THROWS_AS(hidden_convexity_gap(0.9, 0.9, e1, e2, p, q),
                    std::invalid_argument);
}

TEST_CASE("hidden convexity sweep: nonnegative, strict away from equality") {
    std::mt19937 rng(47);
    std::uniform_real_distribution<double> unit(0.0, 1.0), comp(-1.0, 1.0);
    double min_gap = 1e300;
    double min_strict = 1e300;
    for (int k = 0; k < 10000; ++k) {
        const double p = 1.1 + 2.9 * unit(rng);
        const double q = 1.0 + (p - 1.0) * unit(rng);
        const double s = unit(rng);
        const double a1 = std::pow(s, 1.0 / q);
        const double a2 = std::pow(1.0 - s, 1.0 / q);
        const double e1[2] = {comp(rng), comp(rng)};
        const double e2[2] = {comp(rng), comp(rng)};
        const double gap = hidden_convexity_gap(a1, a2, e1, e2, p, q);
        min_gap = std::min(min_gap, gap);
        if (std::abs(a1 - a2) > 0.1 &&
            std::abs(e1[0]) + std::abs(e1[1]) + std::abs(e2[0]) + std::abs(e2[1]) >
                0.5)
            min_strict = std::min(min_strict, gap);
    }
    CHECK(min_gap >= 0.0);
    CHECK(min_strict > 1e-10);
}

TEST_CASE("problem spec validation") {
    const Grid g = grid_1d(0.0, 1.0, 5, BoundaryMode::Dirichlet);
    CHECK_THROWS_AS(make_problem(g, unit_weight(g), 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(make_problem(g, unit_weight(g), 2.0, 2.5), std::invalid_argument);
    CHECK_THROWS_AS(make_problem(g, unit_weight(g), 2.0, 0.5), std::invalid_argument);
    CHECK_NOTHROW(make_problem(g, unit_weight(g), 2.0, 2.0));  // eigen regime
    CHECK_NOTHROW(make_problem(g, unit_weight(g), 2.0, 1.0));  // inequality checks
}
