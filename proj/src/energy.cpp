#include "plap/energy.hpp"

#include <cmath>

namespace plap {

namespace {

// |x|^(e-1) * x with the continuous extension 0 at x == 0 (valid for e > 0).
double signed_pow(double x, double e) {
    if (x == 0.0) return 0.0;
    const double m = std::pow(std::abs(x), e - 1.0);
    return m * x;
}

}  // namespace

ProblemSpec make_problem(Grid g, WeightField w, double p, double q) {
    ensure(w.a.size() == g.node_count(), "make_problem: weight/grid mismatch");
    ensure(p > 1.0, "make_problem: p must exceed 1");
    ensure(q >= 1.0 && q <= p, "make_problem: q must lie in [1, p]");
    ProblemSpec ps;
    ps.grid = std::move(g);
    ps.weight = std::move(w);
    ps.p = p;
    ps.q = q;
    return ps;
}

EnergyBreakdown energy(const Field& u, const ProblemSpec& ps) {
    const Grid& g = ps.grid;
    ensure(u.size() == g.node_count(), "energy: field/grid size mismatch");

    const CellVectorField cv = gradient(u, g);
    double kinetic = 0.0;
    for (int c = 0; c < cv.size(); ++c)
        kinetic += std::pow(cv.magnitude(c), ps.p);
    kinetic *= g.cell_volume();

    double potential = 0.0;
    for (int n = 0; n < g.node_count(); ++n)
        potential += g.node_weight(n) * ps.weight.a[n] * std::pow(std::abs(u[n]), ps.q);

    EnergyBreakdown e;
    e.kinetic = kinetic;
    e.potential = potential;
    e.total = kinetic / ps.p - potential / ps.q;
    return e;
}

Field kinetic_gradient_part(const Field& u, const ProblemSpec& ps, double eps) {
    const Grid& g = ps.grid;
    ensure(u.size() == g.node_count(), "kinetic_gradient_part: size mismatch");
    ensure(eps >= 0.0, "kinetic_gradient_part: eps must be >= 0");

    const CellVectorField cv = gradient(u, g);
    Field grad = make_field(g);
    const double vol = g.cell_volume();

    // Sum over cells of vol * s^(p-2) * (grad u . d grad u / d u_j)
    // with s = sqrt(|grad u|^2 + eps^2).
    if (g.dim == 1) {
        const double inv_h = 1.0 / g.spacing[0];
        for (int c = 0; c < cv.size(); ++c) {
            const double gx = cv.x[static_cast<std::size_t>(c)];
            const double s2 = gx * gx + eps * eps;
            if (s2 == 0.0) {
                if (ps.p < 2.0)
                    throw std::domain_error(
                        "kinetic gradient: degenerate weight at zero-gradient cell "
                        "(p < 2, eps = 0); regularize with eps > 0");
                continue;  // factor s^(p-2) * gx vanishes for p >= 2
            }
            const double w = vol * std::pow(s2, 0.5 * (ps.p - 2.0)) * gx * inv_h;
            grad[c] -= w;
            grad[c + 1] += w;
        }
    } else {
        const int ny = g.nodes[1];
        const double half_inv_hx = 0.5 / g.spacing[0];
        const double half_inv_hy = 0.5 / g.spacing[1];
        for (int ci = 0; ci < g.cells(0); ++ci) {
            for (int cj = 0; cj < g.cells(1); ++cj) {
                const int c = g.cell_index(ci, cj);
                const double gx = cv.x[static_cast<std::size_t>(c)];
                const double gy = cv.y[static_cast<std::size_t>(c)];
                const double s2 = gx * gx + gy * gy + eps * eps;
                if (s2 == 0.0) {
                    if (ps.p < 2.0)
                        throw std::domain_error(
                            "kinetic gradient: degenerate weight at zero-gradient cell "
                            "(p < 2, eps = 0); regularize with eps > 0");
                    continue;
                }
                const double f = vol * std::pow(s2, 0.5 * (ps.p - 2.0));
                const double wx = f * gx * half_inv_hx;
                const double wy = f * gy * half_inv_hy;
                const int n00 = ci * ny + cj;
                const int n01 = n00 + 1;
                const int n10 = n00 + ny;
                const int n11 = n10 + 1;
                grad[n00] += -wx - wy;
                grad[n10] += wx - wy;
                grad[n01] += -wx + wy;
                grad[n11] += wx + wy;
            }
        }
    }

    return grad;
}

Field potential_gradient_part(const Field& u, const ProblemSpec& ps, double r) {
    const Grid& g = ps.grid;
    ensure(u.size() == g.node_count(), "potential_gradient_part: size mismatch");
    ensure(r > 1.0, "potential_gradient_part: undefined at u == 0 for r == 1");
    Field grad = make_field(g);
    for (int n = 0; n < g.node_count(); ++n)
        grad[n] = g.node_weight(n) * ps.weight.a[n] * signed_pow(u[n], r - 1.0);
    return grad;
}

Field energy_gradient(const Field& u, const ProblemSpec& ps, double eps) {
    ensure(ps.q > 1.0, "energy_gradient: potential gradient undefined for q == 1");
    Field grad = kinetic_gradient_part(u, ps, eps);
    const Field pot = potential_gradient_part(u, ps, ps.q);
    const Grid& g = ps.grid;
    for (int n = 0; n < g.node_count(); ++n) grad[n] -= pot[n];
    if (g.bc == BoundaryMode::Dirichlet) {
        for (int n = 0; n < g.node_count(); ++n)
            if (g.is_boundary(n)) grad[n] = 0.0;
    }
    return grad;
}

double constraint_value(const Field& u, const ProblemSpec& ps, double r) {
    const Grid& g = ps.grid;
    ensure(u.size() == g.node_count(), "constraint_value: size mismatch");
    double s = 0.0;
    for (int n = 0; n < g.node_count(); ++n)
        s += g.node_weight(n) * ps.weight.a[n] * std::pow(std::abs(u[n]), r);
    return s;
}

double constraint_value(const Field& u, const ProblemSpec& ps) {
    return constraint_value(u, ps, ps.q);
}

Field project_to_Sa(const Field& u, const ProblemSpec& ps) {
    const double cv = constraint_value(u, ps);
    ensure(cv > 0.0, "project_to_Sa: constraint value must be positive");
    const double scale = std::pow(cv, -1.0 / ps.q);
    Field out = u;
    for (double& v : out.values) v *= scale;
    return out;
}

double rayleigh(const Field& u, const ProblemSpec& ps, double r) {
    ensure(r == ps.q || r == ps.p, "rayleigh: r must be q or p");
    const double denom = constraint_value(u, ps, r);
    ensure(denom > 0.0, "rayleigh: nonpositive denominator base");
    return energy(u, ps).kinetic / std::pow(denom, ps.p / r);
}

std::vector<double> picone_gap(const Field& u, const Field& v,
                               const ProblemSpec& ps, double eps) {
    const Grid& g = ps.grid;
    ensure(u.size() == g.node_count() && v.size() == g.node_count(),
           "picone_gap: size mismatch");
    ensure(eps > 0.0, "picone_gap: eps must be > 0");
    for (int n = 0; n < g.node_count(); ++n)
        ensure(u[n] >= 0.0 && v[n] >= 0.0, "picone_gap: fields must be nonnegative");

    Field shifted = u;
    for (double& x : shifted.values) x += eps;
    Field test = make_field(g);
    for (int n = 0; n < g.node_count(); ++n)
        test[n] = std::pow(v[n], ps.q) / std::pow(shifted[n], ps.q - 1.0);

    const CellVectorField gu = gradient(shifted, g);
    const CellVectorField gv = gradient(v, g);
    const CellVectorField gt = gradient(test, g);

    std::vector<double> gap(static_cast<std::size_t>(g.cell_count()), 0.0);
    for (int c = 0; c < g.cell_count(); ++c) {
        const double mu = gu.magnitude(c);
        const double mv = gv.magnitude(c);
        double dot = gu.x[static_cast<std::size_t>(c)] * gt.x[static_cast<std::size_t>(c)];
        if (g.dim == 2)
            dot += gu.y[static_cast<std::size_t>(c)] * gt.y[static_cast<std::size_t>(c)];
        const double lhs = mu > 0.0 ? std::pow(mu, ps.p - 2.0) * dot : 0.0;
        const double rhs = std::pow(mu, ps.p - ps.q) * std::pow(mv, ps.q);
        gap[static_cast<std::size_t>(c)] = rhs - lhs;
    }
    return gap;
}

double hidden_convexity_gap(double a1, double a2, std::span<const double> e1,
                            std::span<const double> e2, double p, double q) {
    ensure(p > 1.0 && q >= 1.0 && q <= p, "hidden_convexity_gap: need 1 <= q <= p");
    ensure(a1 >= 0.0 && a1 <= 1.0 && a2 >= 0.0 && a2 <= 1.0,
           "hidden_convexity_gap: coefficients must lie in [0,1]");
    ensure(std::abs(std::pow(a1, q) + std::pow(a2, q) - 1.0) <= 1e-12,
           "hidden_convexity_gap: a1^q + a2^q must equal 1");
    ensure(e1.size() == e2.size() && !e1.empty(),
           "hidden_convexity_gap: vector size mismatch");

    const double w1 = std::pow(a1, q - 1.0);
    const double w2 = std::pow(a2, q - 1.0);
    double combo2 = 0.0, n1_2 = 0.0, n2_2 = 0.0;
    for (std::size_t k = 0; k < e1.size(); ++k) {
        const double c = w1 * e1[k] + w2 * e2[k];
        combo2 += c * c;
        n1_2 += e1[k] * e1[k];
        n2_2 += e2[k] * e2[k];
    }
    const double lhs = std::pow(combo2, 0.5 * p);
    const double rhs =
        std::pow(2.0, p / q - 1.0) * (std::pow(n1_2, 0.5 * p) + std::pow(n2_2, 0.5 * p));
    return rhs - lhs;
}

}  // namespace plap
