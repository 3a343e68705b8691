#include "plap/solve.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>

namespace plap {

namespace {

constexpr double kArmijoSlope = 1e-4;
constexpr double kBacktrackFactor = 0.5;
constexpr int kMaxBacktracks = 80;
constexpr double kStepFloor = 1e-18;
constexpr double kStepCeil = 1e18;
// Double precision cannot register objective decreases below ulp(|obj|), so
// backtracking can exhaust with the scaled residual well above tol_grad.
// An exhausted search (after one Barzilai-Borwein restart) below the mode
// floor counts as converged; the floors reflect the observed stationarity
// limits of the two objective shapes.
constexpr double kEnergyFloor = 1e-4;
constexpr double kQuotientFloor = 1e-6;
// Accepted steps whose relative decrease stays below tol_energy in a row
// before a floor-level residual counts as converged.
constexpr int kStallWindow = 25;
const double kInf = std::numeric_limits<double>::infinity();

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

struct DescentCallbacks {
    // Objective; +inf marks an infeasible point (quotient with constraint <= 0).
    std::function<double(const Field&)> value;
    // Gradient with fixed nodes (boundary, pinned mask) already zeroed.
    std::function<Field(const Field&)> grad;
    // Renormalization applied to every accepted iterate; may be null.
    std::function<void(Field&)> normalize;
    // Stationarity scale of the most recent grad() call: the gradient test is
    // res <= tol * scale. Energy descent uses the pre-cancellation magnitude
    // of the gradient terms (so the test follows the field amplitude);
    // quotient descent uses max(1, |objective|).
    std::function<double()> grad_scale;
    double floor_tol = kQuotientFloor;
    // Node groups (positive-set components) that a candidate step may not
    // zero out while they carry mass: minimizers are positive on every such
    // component, so a step that kills one has left the basin of interest.
    std::vector<std::vector<int>> keep_alive;
};

struct DescentOutcome {
    Field u;
    double residual = 0.0;
    int iterations = 0;
    bool converged = false;
};

bool kills_live_group(const std::vector<std::vector<int>>& groups, const Field& u,
                      const Field& cand) {
    for (const auto& group : groups) {
        bool was_alive = false, still_alive = false;
        for (int node : group) {
            was_alive = was_alive || u[node] > 0.0;
            still_alive = still_alive || cand[node] > 0.0;
        }
        if (was_alive && !still_alive) return true;
    }
    return false;
}

// Iterates live in the nonnegative cone (the energy and the quotients are
// |u|-invariant, so nothing is lost): the trial step clips at zero. This is
// what lets dead-core nodes land exactly at u = 0 instead of pinning the
// step size to the sublinear potential's exploding curvature there. The
// stationarity measure is the projected gradient: at a clipped node only a
// negative gradient component (pushing back into the cone) counts.
double projected_residual(const Field& u, const Field& g) {
    double r = 0.0;
    for (int k = 0; k < u.size(); ++k) {
        const double gk = u[k] > 0.0 ? g[k] : std::min(g[k], 0.0);
        r = std::max(r, std::abs(gk));
    }
    return r;
}

// Barzilai-Borwein trial step with monotone Armijo backtracking on the
// clipped candidate. Both tolerances are relative; the gradient test uses
// the mode's stationarity scale. The objective reference value carried
// across iterations is the accepted candidate value, so the recorded
// sequence is nonincreasing by construction even when `normalize` rescales
// the iterate afterwards.
DescentOutcome descend(const DescentCallbacks& cb, Field u, const SolveOptions& opts,
                       int budget) {
    for (double& v : u.values)
        if (v < 0.0) v = 0.0;
    if (cb.normalize) cb.normalize(u);
    double obj = cb.value(u);
    Field g = cb.grad(u);
    double res = projected_residual(u, g);
    double scale = cb.grad_scale();
    double rel_dec = 0.0;
    double alpha_last = 1.0 / std::max(res, 1e-12);
    Field u_prev, g_prev;
    bool have_prev = false;
    bool restarted = false;  // one BB restart after an exhausted line search

    DescentOutcome out;
    out.iterations = 0;
    const int n = u.size();
    int stalled = 0;
    const double floor_tol = std::max(opts.tol_grad, cb.floor_tol);

    while (true) {
        if (res <= opts.tol_grad * scale && rel_dec <= opts.tol_energy) {
            out.converged = true;
            break;
        }
        // Objective plateau at a floor-level residual: the iterate jiggles at
        // the precision limit without measurable descent.
        if (stalled >= kStallWindow && res <= floor_tol * scale) {
            out.converged = true;
            break;
        }
        if (out.iterations >= budget) break;

        double alpha;
        if (have_prev) {
            double ss = 0.0, sy = 0.0;
            for (int k = 0; k < n; ++k) {
                const double s = u[k] - u_prev[k];
                const double y = g[k] - g_prev[k];
                ss += s * s;
                sy += s * y;
            }
            alpha = (sy > 0.0 && ss > 0.0) ? ss / sy : alpha_last * 2.0;
        } else {
            alpha = alpha_last;
        }
        alpha = std::clamp(alpha, kStepFloor, kStepCeil);

        Field cand = u;
        double cand_obj = kInf;
        bool accepted = false;
        for (int t = 0; t < kMaxBacktracks; ++t) {
            double slope = 0.0;  // g . (cand - u) <= 0 by construction
            bool any_positive = false;
            for (int k = 0; k < n; ++k) {
                cand[k] = std::max(0.0, u[k] - alpha * g[k]);
                slope += g[k] * (cand[k] - u[k]);
                any_positive = any_positive || cand[k] > 0.0;
            }
            if (slope == 0.0) break;  // fully blocked by the cone
            if (!any_positive || kills_live_group(cb.keep_alive, u, cand)) {
                // The zero field is stationary but never the minimizer we
                // are after, and zeroing out a whole live component leaves
                // the basin of the positive minimizer; a shorter step keeps
                // the iterate nontrivial.
                alpha *= kBacktrackFactor;
                continue;
            }
            cand_obj = cb.value(cand);
            if (cand_obj <= obj + kArmijoSlope * slope) {
                accepted = true;
                break;
            }
            alpha *= kBacktrackFactor;
        }
        if (!accepted) {
            if (!restarted) {
                restarted = true;
                have_prev = false;
                alpha_last = 1.0 / std::max(res, 1e-12);
                continue;
            }
            out.converged = res <= floor_tol * scale && rel_dec <= opts.tol_energy;
            break;
        }
        restarted = false;

        u_prev = u;
        g_prev = g;
        have_prev = true;
        alpha_last = alpha;
        rel_dec = (obj - cand_obj) /
                  std::max({std::abs(obj), std::abs(cand_obj), 1e-30});
        stalled = rel_dec <= opts.tol_energy ? stalled + 1 : 0;
        obj = cand_obj;
        u = std::move(cand);
        if (cb.normalize) cb.normalize(u);
        g = cb.grad(u);
        res = projected_residual(u, g);
        scale = cb.grad_scale();
        ++out.iterations;
        if (opts.objective_trace) opts.objective_trace->push_back(obj);
    }

    out.u = std::move(u);
    out.residual = res;
    return out;
}

double eps_effective(const SolveOptions& opts, const Field& u) {
    return opts.eps * std::max(1.0, max_abs(u.values));
}

bool is_free_node(const Grid& g, const std::vector<std::uint8_t>& mask, int n) {
    if (g.bc == BoundaryMode::Dirichlet && g.is_boundary(n)) return false;
    if (!mask.empty() && mask[static_cast<std::size_t>(n)]) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Nodewise equilibration.
//
// Projected descent handles every scale the line search can measure, but a
// positive tail reaching through a strongly negative region contributes less
// than ulp(objective) until it has regrown by many orders of magnitude, so
// first-order steps cannot rebuild it once a transient has clipped it to
// zero. A Gauss-Seidel pass of exact single-node minimizations fixes that:
// each node's one-dimensional problem is solved directly (log-scale scan
// plus golden-section refinement), which resolves equilibria across the full
// double range. Dead nodes stay exactly dead because zero is their genuine
// local minimizer. Sweeps run between descent phases; they are monotone in
// the objective and deterministic.

constexpr double kGolden = 0.6180339887498949;

// Exact-ish minimizer of phi over [0, hi] with a log-scale presample.
template <typename F>
double minimize_ray(const F& phi, double hi, double seed_value) {
    double best_v = 0.0;
    double best = phi(0.0);
    auto consider = [&](double v) {
        const double val = phi(v);
        if (val < best) {
            best = val;
            best_v = v;
        }
    };
    consider(seed_value);
    const double lo_mag = hi * 1e-300;
    for (double v = hi; v > lo_mag; v *= 1e-4) consider(v);
    // Golden-section around the champion.
    double a = best_v > 0.0 ? best_v * 1e-4 : 0.0;
    double b = std::min(hi, best_v > 0.0 ? best_v * 1e4 : hi * 1e-4);
    if (b <= a) b = hi;
    double x1 = b - kGolden * (b - a), x2 = a + kGolden * (b - a);
    double f1 = phi(x1), f2 = phi(x2);
    for (int it = 0; it < 90 && b - a > 1e-14 * (std::abs(b) + 1e-300); ++it) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - kGolden * (b - a);
            f1 = phi(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + kGolden * (b - a);
            f2 = phi(x2);
        }
    }
    consider(0.5 * (a + b));
    return best_v;
}

// Kinetic contribution of the cells containing `node`, with that node's
// value overridden by v.
double local_cell_kinetic(const Grid& g, const Field& u, int node, double v,
                          double p) {
    double sum = 0.0;
    const double vol = g.cell_volume();
    if (g.dim == 1) {
        const double inv_h = 1.0 / g.spacing[0];
        if (node > 0)
            sum += std::pow(std::abs((v - u[node - 1]) * inv_h), p);
        if (node + 1 < g.nodes[0])
            sum += std::pow(std::abs((u[node + 1] - v) * inv_h), p);
        return vol * sum;
    }
    const int ny = g.nodes[1];
    const int i = node / ny, j = node % ny;
    const double inv_hx = 1.0 / g.spacing[0], inv_hy = 1.0 / g.spacing[1];
    for (int ci = i - 1; ci <= i; ++ci) {
        for (int cj = j - 1; cj <= j; ++cj) {
            if (ci < 0 || cj < 0 || ci >= g.cells(0) || cj >= g.cells(1)) continue;
            const int n00 = ci * ny + cj;
            auto val = [&](int nn) { return nn == node ? v : u[nn]; };
            const double u00 = val(n00), u01 = val(n00 + 1);
            const double u10 = val(n00 + ny), u11 = val(n00 + ny + 1);
            const double gx = 0.5 * ((u10 - u00) + (u11 - u01)) * inv_hx;
            const double gy = 0.5 * ((u01 - u00) + (u11 - u10)) * inv_hy;
            sum += std::pow(std::sqrt(gx * gx + gy * gy), p);
        }
    }
    return vol * sum;
}

// One forward-backward pass; returns the number of nodes changed.
//
// Energy mode minimizes the exact local energy. Quotient mode minimizes the
// exact local quotient (K0 + k(v)) / (C0 + c(v))^(p/r) while the node's
// contribution is representable against the running totals, and switches to
// the Lagrangian surrogate k(v)/p - (Lambda/r) c(v) with Lambda = pK/C
// frozen once the node sits so deep that its contribution is below
// ulp(objective); the surrogate's local terms stay comparable at any
// magnitude, which is how sub-ulp tails get rebuilt at all.
int equilibrate_pass(Field& u, const ProblemSpec& ps,
                     const std::vector<std::uint8_t>& mask, double quotient_r,
                     const std::vector<std::uint8_t>& active,
                     std::vector<std::uint8_t>& next_active) {
    const Grid& g = ps.grid;
    double kin_total = energy(u, ps).kinetic;
    double con_total = 0.0;
    double multiplier = 0.0;
    if (quotient_r > 0.0) {
        con_total = constraint_value(u, ps, quotient_r);
        if (!(con_total > 0.0)) return 0;
        multiplier = ps.p * kin_total / con_total;
    }
    const double sup = max_abs(u.values);
    int changed = 0;

    auto mark_neighborhood = [&](int n) {
        next_active[static_cast<std::size_t>(n)] = 1;
        if (g.dim == 1) {
            if (n > 0) next_active[static_cast<std::size_t>(n - 1)] = 1;
            if (n + 1 < g.node_count()) next_active[static_cast<std::size_t>(n + 1)] = 1;
        } else {
            const int ny = g.nodes[1];
            const int i = n / ny, j = n % ny;
            for (int di = -1; di <= 1; ++di)
                for (int dj = -1; dj <= 1; ++dj) {
                    const int ii = i + di, jj = j + dj;
                    if (ii >= 0 && ii < g.nodes[0] && jj >= 0 && jj < ny)
                        next_active[static_cast<std::size_t>(ii * ny + jj)] = 1;
                }
        }
    };

    auto relax_node = [&](int n) {
        if (!active[static_cast<std::size_t>(n)]) return;
        if (!is_free_node(g, mask, n)) return;
        const double old_v = u[n];
        const double a_n = ps.weight.a[n];
        const double w_n = g.node_weight(n);
        const double hi = 4.0 * std::max({std::abs(old_v), sup, 1e-300});
        const bool deep = std::abs(old_v) <= 1e-6 * sup;

        double best_v = old_v;
        bool commit = false;
        if (quotient_r == 0.0) {
            auto psi = [&](double v) {
                return local_cell_kinetic(g, u, n, v, ps.p) / ps.p -
                       w_n * a_n * std::pow(std::abs(v), ps.q) / ps.q;
            };
            best_v = minimize_ray(psi, hi, old_v);
            commit = best_v != old_v && psi(best_v) < psi(old_v);
        } else if (deep) {
            const double coeff = multiplier * w_n * a_n / quotient_r;
            auto psi = [&](double v) {
                return local_cell_kinetic(g, u, n, v, ps.p) / ps.p -
                       (coeff / ps.p) * std::pow(std::abs(v), quotient_r);
            };
            best_v = minimize_ray(psi, hi, old_v);
            commit = best_v != old_v && psi(best_v) < psi(old_v);
        } else {
            const double kin_base =
                kin_total - local_cell_kinetic(g, u, n, old_v, ps.p);
            const double con_base =
                con_total - w_n * a_n * std::pow(std::abs(old_v), quotient_r);
            auto phi = [&](double v) {
                const double c =
                    con_base + w_n * a_n * std::pow(std::abs(v), quotient_r);
                if (!(c > 0.0)) return kInf;
                return (kin_base + local_cell_kinetic(g, u, n, v, ps.p)) /
                       std::pow(c, ps.p / quotient_r);
            };
            best_v = minimize_ray(phi, hi, old_v);
            commit = best_v != old_v && phi(best_v) < phi(old_v);
        }
        if (commit) {
            if (quotient_r > 0.0) {
                kin_total += local_cell_kinetic(g, u, n, best_v, ps.p) -
                             local_cell_kinetic(g, u, n, old_v, ps.p);
                con_total += w_n * a_n *
                             (std::pow(std::abs(best_v), quotient_r) -
                              std::pow(std::abs(old_v), quotient_r));
            }
            u[n] = best_v;
            mark_neighborhood(n);
            ++changed;
        }
    };

    for (int n = 0; n < g.node_count(); ++n) relax_node(n);
    for (int n = g.node_count() - 1; n >= 0; --n) relax_node(n);
    return changed;
}

// Run passes until the field stops changing materially. Later passes only
// revisit the neighborhoods of nodes that moved. Descent resumes afterwards,
// so the pass budget stays short.
void equilibrate(Field& u, const ProblemSpec& ps,
                 const std::vector<std::uint8_t>& mask, double quotient_r) {
    Field prev = u;
    std::vector<std::uint8_t> active(u.values.size(), 1);
    std::vector<std::uint8_t> next_active(u.values.size(), 0);
    for (int pass = 0; pass < 80; ++pass) {
        std::fill(next_active.begin(), next_active.end(), 0);
        const int changed =
            equilibrate_pass(u, ps, mask, quotient_r, active, next_active);
        if (changed == 0) break;
        std::swap(active, next_active);
        double delta = 0.0, scale = 1e-300;
        for (int n = 0; n < u.size(); ++n) {
            delta = std::max(delta, std::abs(u[n] - prev[n]));
            scale = std::max(scale, std::abs(u[n]));
        }
        if (delta <= 1e-12 * scale) break;
        prev = u;
    }
}

Field initial_field(const ProblemSpec& ps, const SolveOptions& opts,
                    const std::vector<std::uint8_t>& mask) {
    const Grid& g = ps.grid;
    Field u = make_field(g);
    switch (opts.init) {
        case InitKind::GivenField:
            ensure(opts.init_field.size() == g.node_count(),
                   "solve: given initial field does not match grid");
            // The objective is |u|-invariant and iterates live in the
            // nonnegative cone, so a given start enters by absolute value.
            u = opts.init_field;
            for (double& v : u.values) v = std::abs(v);
            break;
        case InitKind::RandomPositive: {
            std::mt19937_64 rng(opts.seed);
            std::uniform_real_distribution<double> dist(0.5, 1.5);
            for (int n = 0; n < g.node_count(); ++n)
                if (is_free_node(g, mask, n)) u[n] = dist(rng);
            break;
        }
        case InitKind::IndicatorPositiveSet:
            for (int n = 0; n < g.node_count(); ++n)
                if (is_free_node(g, mask, n) && ps.weight.a[n] > 0.0) u[n] = 1.0;
            break;
    }
    u = enforce_boundary(u, g);
    if (!mask.empty())
        for (int n = 0; n < g.node_count(); ++n)
            if (mask[static_cast<std::size_t>(n)]) u[n] = 0.0;
    return u;
}

Field indicator_init(const ProblemSpec& ps, const std::vector<std::uint8_t>& mask) {
    SolveOptions ind;
    ind.init = InitKind::IndicatorPositiveSet;
    return initial_field(ps, ind, mask);
}

void zero_fixed(Field& f, const Grid& g, const std::vector<std::uint8_t>& mask) {
    if (g.bc == BoundaryMode::Dirichlet)
        for (int n = 0; n < g.node_count(); ++n)
            if (g.is_boundary(n)) f[n] = 0.0;
    if (!mask.empty())
        for (int n = 0; n < g.node_count(); ++n)
            if (mask[static_cast<std::size_t>(n)]) f[n] = 0.0;
}

void check_common(const ProblemSpec& ps, bool needs_subhomogeneous) {
    if (needs_subhomogeneous)
        ensure(ps.q > 1.0 && ps.q < ps.p, "solve: requires 1 < q < p");
    if (ps.grid.bc == BoundaryMode::Neumann)
        ensure(neumann_admissible(ps.weight, ps.grid),
               "solve: Neumann mode requires int a < 0");
}

// Free-node lists of the positive-set components that remain unmasked.
std::vector<std::vector<int>> live_components(const ProblemSpec& ps,
                                              const std::vector<std::uint8_t>& mask) {
    std::vector<std::vector<int>> groups(
        static_cast<std::size_t>(ps.weight.n_components));
    for (int n = 0; n < ps.grid.node_count(); ++n) {
        const int label = ps.weight.labels[static_cast<std::size_t>(n)];
        if (label > 0 && is_free_node(ps.grid, mask, n))
            groups[static_cast<std::size_t>(label - 1)].push_back(n);
    }
    std::erase_if(groups, [](const std::vector<int>& v) { return v.empty(); });
    return groups;
}

// Exact minimization along per-support-component scaling rays. Connected
// components of {u > 0} are separated by exact zeros, so scaling one
// component leaves every other cell untouched and the optimal amplitude has
// a closed form: t = (S/K)^(1/(p-e)) with K the component's kinetic
// integral and S its weighted e-mass. This kills the soft amplitude and
// mass-split modes that plain descent crawls along. Skipped in eigen mode
// (e == p), where the split is genuinely degenerate.
void ray_polish(Field& u, const ProblemSpec& ps, double quotient_r,
                const std::function<double(const Field&)>& value) {
    const Grid& g = ps.grid;
    const double e = quotient_r > 0.0 ? quotient_r : ps.q;
    if (e >= ps.p) return;

    std::vector<std::uint8_t> support(u.values.size(), 0);
    for (int n = 0; n < u.size(); ++n)
        support[static_cast<std::size_t>(n)] = u[n] > 0.0;
    const MaskLabels sl = label_mask(support, g);
    if (sl.count == 0) return;

    std::vector<double> kin(static_cast<std::size_t>(sl.count) + 1, 0.0);
    std::vector<double> mass(static_cast<std::size_t>(sl.count) + 1, 0.0);
    const CellVectorField cv = gradient(u, g);
    const double vol = g.cell_volume();
    auto cell_group = [&](int c) -> int {
        // Label of the cell's support nodes; -1 if two components meet.
        int label = 0;
        auto visit = [&](int node) {
            const int l = sl.labels[static_cast<std::size_t>(node)];
            if (l == 0) return true;
            if (label == 0) label = l;
            return label == l;
        };
        if (g.dim == 1) {
            if (!visit(c) || !visit(c + 1)) return -1;
            return label;
        }
        const int ny = g.nodes[1];
        const int ci = c / g.cells(1), cj = c % g.cells(1);
        const int n00 = ci * ny + cj;
        for (int node : {n00, n00 + 1, n00 + ny, n00 + ny + 1})
            if (!visit(node)) return -1;
        return label;
    };
    for (int c = 0; c < g.cell_count(); ++c) {
        const int label = cell_group(c);
        if (label < 0) return;  // components share a cell: rays couple
        if (label > 0)
            kin[static_cast<std::size_t>(label)] += vol * std::pow(cv.magnitude(c), ps.p);
    }
    for (int n = 0; n < u.size(); ++n) {
        const int l = sl.labels[static_cast<std::size_t>(n)];
        if (l > 0)
            mass[static_cast<std::size_t>(l)] +=
                g.node_weight(n) * ps.weight.a[n] * std::pow(u[n], e);
    }

    Field cand = u;
    bool any = false;
    for (int l = 1; l <= sl.count; ++l) {
        const double K = kin[static_cast<std::size_t>(l)];
        const double S = mass[static_cast<std::size_t>(l)];
        if (!(K > 0.0) || !(S > 0.0)) continue;
        const double t = std::pow(S / K, 1.0 / (ps.p - e));
        if (t == 1.0 || !std::isfinite(t) || t <= 0.0) continue;
        for (int n = 0; n < u.size(); ++n)
            if (sl.labels[static_cast<std::size_t>(n)] == l) cand[n] = t * u[n];
        any = true;
    }
    if (any && value(cand) < value(u)) u = std::move(cand);
}

// Alternate descent with equilibration sweeps and ray polish until nothing
// moves the iterate, then judge convergence by the stationarity of the final
// state. Descent alone cannot maintain structure whose objective
// contribution is below ulp(objective); the sweeps restore it after each
// phase.
DescentOutcome run_phases(const DescentCallbacks& cb, const ProblemSpec& ps,
                          const std::vector<std::uint8_t>& mask, double quotient_r,
                          Field u, const SolveOptions& opts, int budget) {
    DescentOutcome out;
    int used = 0;
    for (int round = 0; round < 8 && budget > 0; ++round) {
        out = descend(cb, std::move(u), opts, budget);
        used += out.iterations;
        budget -= out.iterations;
        u = std::move(out.u);
        if (!opts.equilibrate) break;

        const Field before = u;
        equilibrate(u, ps, mask, quotient_r);
        ray_polish(u, ps, quotient_r, cb.value);
        double delta = 0.0, scale = 1e-300;
        for (int n = 0; n < u.size(); ++n) {
            delta = std::max(delta, std::abs(u[n] - before[n]));
            scale = std::max(scale, std::abs(u[n]));
        }
        const bool sweeps_moved = delta > 1e-12 * scale;
        if (out.converged && !sweeps_moved) break;
    }
    if (cb.normalize) cb.normalize(u);
    const Field g = cb.grad(u);
    out.residual = projected_residual(u, g);
    const double tol = std::max(opts.tol_grad, cb.floor_tol);
    out.converged = out.residual <= tol * cb.grad_scale();
    out.iterations = used;
    out.u = std::move(u);
    return out;
}

// Shared driver for the scale-invariant quotient modes (constrained,
// restricted, eigen). r is the constraint exponent.
SolveResult quotient_solve(const ProblemSpec& ps, const SolveOptions& opts, double r,
                           const std::vector<std::uint8_t>& mask, SolveMode mode) {
    const Grid& g = ps.grid;
    bool has_positive = false;
    for (int n = 0; n < g.node_count(); ++n)
        if (is_free_node(g, mask, n) && ps.weight.a[n] > 0.0) has_positive = true;
    ensure(has_positive, "solve: weight has no positive part on free nodes");

    DescentCallbacks cb;
    double stationarity_scale = 1.0;
    cb.value = [&](const Field& u) {
        const double c = constraint_value(u, ps, r);
        if (!(c > 0.0)) return kInf;
        return energy(u, ps).kinetic / std::pow(c, ps.p / r);
    };
    cb.grad = [&](const Field& u) {
        const double c = constraint_value(u, ps, r);
        const double kin = energy(u, ps).kinetic;
        Field kp = kinetic_gradient_part(u, ps, eps_effective(opts, u));
        const Field pp = potential_gradient_part(u, ps, r);
        const double ratio = kin / c;
        const double scale = ps.p / std::pow(c, ps.p / r);
        for (int n = 0; n < g.node_count(); ++n)
            kp[n] = scale * (kp[n] - ratio * pp[n]);
        zero_fixed(kp, g, mask);
        stationarity_scale = std::max(1.0, kin / std::pow(c, ps.p / r));
        return kp;
    };
    cb.grad_scale = [&] { return stationarity_scale; };
    cb.floor_tol = kQuotientFloor;
    cb.keep_alive = live_components(ps, mask);
    cb.normalize = [&](Field& u) {
        if (!mask.empty())
            for (int n = 0; n < g.node_count(); ++n)
                if (mask[static_cast<std::size_t>(n)]) u[n] = 0.0;
        const double c = constraint_value(u, ps, r);
        const double s = std::pow(c, -1.0 / r);
        for (double& v : u.values) v *= s;
    };

    Field u0 = initial_field(ps, opts, mask);
    if (!(constraint_value(u0, ps, r) > 0.0)) u0 = indicator_init(ps, mask);
    ensure(constraint_value(u0, ps, r) > 0.0,
           "solve: infeasible start (no positive constraint mass)");

    DescentOutcome run =
        run_phases(cb, ps, mask, r, std::move(u0), opts, opts.max_iter);

    // One reinitialization if descent stalled away from a critical point.
    if (!run.converged && run.iterations < opts.max_iter &&
        opts.init != InitKind::IndicatorPositiveSet) {
        DescentOutcome retry =
            run_phases(cb, ps, mask, r, indicator_init(ps, mask), opts,
                       opts.max_iter - run.iterations);
        retry.iterations += run.iterations;
        if (retry.converged || retry.residual < run.residual) run = std::move(retry);
    }

    SolveResult res;
    res.objective = cb.value(run.u);
    res.residual = run.residual;
    res.iterations = run.iterations;
    res.converged = run.converged;
    res.mode = mode;
    res.u = std::move(run.u);
    if (g.bc == BoundaryMode::Neumann) {
        const auto [mn, mx] =
            std::minmax_element(res.u.values.begin(), res.u.values.end());
        const double span = *mx - *mn;
        const double scale = std::max(std::abs(*mx), std::abs(*mn));
        if (span <= 1e-12 * std::max(scale, 1e-300)) res.suspect_trivial = true;
    }
    return res;
}

}  // namespace

SolveResult minimize_global(const ProblemSpec& ps, const SolveOptions& opts) {
    check_common(ps, /*needs_subhomogeneous=*/true);
    const std::vector<std::uint8_t> no_mask;

    const Grid& g = ps.grid;
    DescentCallbacks cb;
    double stationarity_scale = 1.0;
    cb.value = [&](const Field& u) { return energy(u, ps).total; };
    cb.grad = [&](const Field& u) {
        Field kin = kinetic_gradient_part(u, ps, eps_effective(opts, u));
        const Field pot = potential_gradient_part(u, ps, ps.q);
        double mag = 0.0;
        for (int n = 0; n < g.node_count(); ++n) {
            if (g.bc == BoundaryMode::Dirichlet && g.is_boundary(n)) {
                kin[n] = 0.0;
                continue;
            }
            mag = std::max(mag, std::abs(kin[n]) + std::abs(pot[n]));
            kin[n] -= pot[n];
        }
        stationarity_scale = std::max(mag, 1e-300);
        return kin;
    };
    cb.grad_scale = [&] { return stationarity_scale; };
    cb.floor_tol = kEnergyFloor;
    cb.keep_alive = live_components(ps, no_mask);
    cb.normalize = nullptr;

    DescentOutcome run = run_phases(cb, ps, no_mask, 0.0,
                                    initial_field(ps, opts, no_mask), opts,
                                    opts.max_iter);

    SolveResult res;
    res.u = std::move(run.u);
    res.objective = energy(res.u, ps).total;
    res.iterations = run.iterations;
    res.converged = run.converged;
    res.residual = run.residual;
    res.mode = SolveMode::Global;
    // A nonnegative minimum means the iterate escaped to the trivial state;
    // the energy of the true minimizer is strictly negative.
    res.suspect_trivial = res.objective >= 0.0;
    return res;
}

SolveResult minimize_constrained(const ProblemSpec& ps, const SolveOptions& opts) {
    check_common(ps, /*needs_subhomogeneous=*/true);
    return quotient_solve(ps, opts, ps.q, {}, SolveMode::Constrained);
}

SolveResult minimize_restricted(const ProblemSpec& ps, const std::vector<int>& keep,
                                const SolveOptions& opts) {
    check_common(ps, /*needs_subhomogeneous=*/true);
    ensure(!keep.empty(), "minimize_restricted: component set must be nonempty");
    const auto mask = component_mask(ps.weight, keep);
    return quotient_solve(ps, opts, ps.q, mask, SolveMode::Restricted);
}

SolveResult principal_eigen(const ProblemSpec& ps, const SolveOptions& opts) {
    check_common(ps, /*needs_subhomogeneous=*/false);
    return quotient_solve(ps, opts, ps.p, {}, SolveMode::Eigen);
}

double residual(const Field& u, const ProblemSpec& ps, double eps) {
    return max_abs(energy_gradient(u, ps, eps).values);
}

}  // namespace plap
