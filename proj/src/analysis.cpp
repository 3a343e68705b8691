#include "plap/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace plap {

namespace {

double max_abs_value(const Field& u) {
    double m = 0.0;
    for (double v : u.values) m = std::max(m, std::abs(v));
    return m;
}

bool dirichlet_flux_ok(const Field& u, const Grid& g) {
    // Outward difference quotient must be strictly negative at every
    // boundary node, along every axis on which the node sits on a face.
    auto check = [&](int b, int inward) { return u[inward] - u[b] > 0.0; };
    if (g.dim == 1) {
        const int n = g.nodes[0];
        return check(0, 1) && check(n - 1, n - 2);
    }
    const int nx = g.nodes[0], ny = g.nodes[1];
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < ny; ++j) {
            const int node = i * ny + j;
            if (i == 0 && !check(node, node + ny)) return false;
            if (i == nx - 1 && !check(node, node - ny)) return false;
            if (j == 0 && !check(node, node + 1)) return false;
            if (j == ny - 1 && !check(node, node - 1)) return false;
        }
    }
    return true;
}

}  // namespace

PositivityReport positivity_report(const Field& u, const ProblemSpec& ps,
                                   double tau_zero) {
    const Grid& g = ps.grid;
    ensure(u.size() == g.node_count(), "positivity_report: size mismatch");
    for (double v : u.values)
        ensure(v >= 0.0, "positivity_report: field must be nonnegative");

    PositivityReport rep;
    const double sup = max_abs_value(u);
    const double zero_level = tau_zero * sup;

    bool any_positive_weight = false;
    double min_pos = std::numeric_limits<double>::infinity();
    double min_free = std::numeric_limits<double>::infinity();
    double min_all = std::numeric_limits<double>::infinity();
    const bool dirichlet = g.bc == BoundaryMode::Dirichlet;
    for (int n = 0; n < g.node_count(); ++n) {
        if (u[n] <= zero_level) rep.dead_core_nodes.push_back(n);
        // The positive set lives in the open domain; Dirichlet-pinned
        // boundary nodes sit outside it even when the weight is positive
        // there.
        if (ps.weight.a[n] > 0.0 && (!dirichlet || !g.is_boundary(n))) {
            any_positive_weight = true;
            min_pos = std::min(min_pos, u[n]);
        }
        if (!dirichlet || !g.is_boundary(n)) min_free = std::min(min_free, u[n]);
        min_all = std::min(min_all, u[n]);
    }
    rep.min_on_positive_set = any_positive_weight ? min_pos : 0.0;
    rep.global_min = std::isfinite(min_free) ? min_free : 0.0;

    if (sup <= 0.0) {
        rep.in_cone = false;
        rep.boundary_flux_ok = false;
        return rep;
    }
    if (dirichlet) {
        rep.boundary_flux_ok = dirichlet_flux_ok(u, g);
        rep.in_cone = rep.boundary_flux_ok && rep.global_min > 0.0;
    } else {
        rep.boundary_flux_ok = true;  // no flux condition in Neumann mode
        rep.in_cone = min_all > 0.0;
    }
    return rep;
}

UniquenessReport multistart_uniqueness(const ProblemSpec& ps, int K,
                                       const SolveOptions& opts, double tolerance,
                                       const std::vector<std::uint64_t>& seeds) {
    ensure(K >= 2, "multistart_uniqueness: K must be at least 2");
    ensure(seeds.empty() || static_cast<int>(seeds.size()) == K,
           "multistart_uniqueness: seed list must match K");

    UniquenessReport rep;
    rep.tolerance = tolerance;
    rep.runs.reserve(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) {
        SolveOptions run_opts = opts;
        run_opts.init = InitKind::RandomPositive;
        run_opts.seed = seeds.empty() ? opts.seed + static_cast<std::uint64_t>(k)
                                      : seeds[static_cast<std::size_t>(k)];
        rep.runs.push_back(minimize_global(ps, run_opts));
    }

    rep.complete = std::all_of(rep.runs.begin(), rep.runs.end(),
                               [](const SolveResult& r) { return r.converged; });

    for (int i = 0; i < K; ++i) {
        for (int j = i + 1; j < K; ++j) {
            const Field& a = rep.runs[static_cast<std::size_t>(i)].u;
            const Field& b = rep.runs[static_cast<std::size_t>(j)].u;
            const double scale =
                std::max({max_abs_value(a), max_abs_value(b), 1e-300});
            double d = 0.0;
            for (int n = 0; n < a.size(); ++n)
                d = std::max(d, std::abs(std::abs(a[n]) - std::abs(b[n])));
            rep.max_pairwise_distance = std::max(rep.max_pairwise_distance, d / scale);
        }
    }
    rep.agree = rep.max_pairwise_distance <= tolerance;
    return rep;
}

Q0Report estimate_q0(const Grid& g, const WeightField& w, double p,
                     const SolveOptions& opts, double q_tol, double tau_zero) {
    ensure(q_tol > 0.0, "estimate_q0: q_tol must be positive");
    ensure(p > 1.0, "estimate_q0: p must exceed 1");

    // Probe bracket strictly inside (1, p), independent of the requested
    // tolerance. The lower margin stays well off q = 1, where the potential
    // gradient degenerates and solves stop being meaningful.
    const double margin_lo = 0.1 * (p - 1.0);
    const double margin_hi = 0.01 * (p - 1.0);
    double lo = 1.0 + margin_lo;
    double hi = p - margin_hi;
    ensure(lo < hi, "estimate_q0: empty probe bracket");

    std::map<double, Q0Probe> probes;
    // Each probe classifies the global minimizer through the constrained
    // solve plus the exact rescaling U_q = m^(1/(q-p)) V_q. Cone membership
    // is scale-invariant, and the constrained iterate keeps unit constraint
    // mass, so the probe stays representable even where the global
    // minimizer's amplitude under- or overflows as q approaches p.
    auto classify = [&](double q) -> const Q0Probe& {
        auto it = probes.find(q);
        if (it != probes.end()) return it->second;
        const ProblemSpec ps = make_problem(g, w, p, q);
        const SolveResult res = minimize_constrained(ps, opts);
        const PositivityReport rep = positivity_report(res.u, ps, tau_zero);
        Q0Probe pr;
        pr.q = q;
        pr.converged = res.converged;
        pr.in_cone = rep.in_cone;
        pr.objective =
            res.objective > 0.0
                ? (1.0 / p - 1.0 / q) * std::pow(res.objective, q / (q - p))
                : 0.0;
        pr.residual = res.residual;
        pr.iterations = res.iterations;
        pr.min_on_positive_set = rep.min_on_positive_set;
        pr.dead_core_count = static_cast<int>(rep.dead_core_nodes.size());
        return probes.emplace(q, pr).first->second;
    };

    Q0Report rep;
    const bool lo_cone = classify(lo).in_cone;
    const bool hi_cone = classify(hi).in_cone;

    if (lo_cone && hi_cone) {
        rep.flag = Q0Flag::AlwaysPositive;
        rep.q0 = lo;
    } else if (!hi_cone) {
        rep.flag = Q0Flag::NeverPositive;
        rep.q0 = hi;
    } else {
        while (hi - lo > q_tol) {
            const double mid = 0.5 * (lo + hi);
            if (classify(mid).in_cone)
                hi = mid;
            else
                lo = mid;
        }
        rep.q0 = lo;
        rep.flag = Q0Flag::Bracketed;
    }

    // Monotonicity of the classification is observed, not assumed.
    bool monotone = true;
    bool seen_cone = false;
    for (const auto& [q, pr] : probes) {
        if (pr.in_cone) seen_cone = true;
        else if (seen_cone) monotone = false;
    }
    if (!monotone) {
        rep.flag = Q0Flag::NonMonotone;
        // Exhaustive scan at step q_tol; every probe is reported verbatim.
        const double scan_lo = 1.0 + margin_lo;
        const double scan_hi = p - margin_hi;
        double last_not_cone = scan_lo;
        for (double q = scan_lo; q <= scan_hi + 1e-12; q += std::max(q_tol, 1e-6)) {
            const Q0Probe& pr = classify(std::min(q, scan_hi));
            if (!pr.in_cone) last_not_cone = pr.q;
        }
        rep.q0 = last_not_cone;
    }

    rep.probes.reserve(probes.size());
    for (const auto& [q, pr] : probes) rep.probes.push_back(pr);
    return rep;
}

Field flip_bump(const Field& u, const WeightField& w, int label, const Grid& g,
                double tau_zero) {
    ensure(u.size() == g.node_count(), "flip_bump: size mismatch");
    ensure(label >= 1 && label <= w.n_components, "flip_bump: unknown component label");

    const double sup = max_abs_value(u);
    ensure(sup > 0.0, "flip_bump: field has no support");

    std::vector<std::uint8_t> support(u.values.size(), 0);
    int support_count = 0;
    for (int n = 0; n < u.size(); ++n) {
        if (std::abs(u[n]) > tau_zero * sup) {
            support[static_cast<std::size_t>(n)] = 1;
            ++support_count;
        }
    }
    const MaskLabels sl = label_mask(support, g);

    // Support components meeting the requested positive-set component.
    std::vector<std::uint8_t> flip_label(static_cast<std::size_t>(sl.count) + 1, 0);
    bool found = false;
    for (int n = 0; n < u.size(); ++n) {
        if (w.labels[static_cast<std::size_t>(n)] == label &&
            sl.labels[static_cast<std::size_t>(n)] > 0) {
            flip_label[static_cast<std::size_t>(sl.labels[static_cast<std::size_t>(n)])] = 1;
            found = true;
        }
    }
    ensure(found, "flip_bump: component carries no support");

    int flipped_count = 0;
    for (int n = 0; n < u.size(); ++n)
        if (sl.labels[static_cast<std::size_t>(n)] > 0 &&
            flip_label[static_cast<std::size_t>(sl.labels[static_cast<std::size_t>(n)])])
            ++flipped_count;
    ensure(flipped_count < support_count,
           "flip_bump: supports not separated (flip would negate the whole field)");

    Field out = u;
    for (int n = 0; n < u.size(); ++n)
        if (sl.labels[static_cast<std::size_t>(n)] > 0 &&
            flip_label[static_cast<std::size_t>(sl.labels[static_cast<std::size_t>(n)])])
            out[n] = -out[n];
    return out;
}

PiconeCertificate certify_by_picone(const SolveResult& solved, const ProblemSpec& ps,
                                    const SolveResult& constrained_ref,
                                    const std::vector<double>& eps_list, double tol,
                                    double tau_zero) {
    const Grid& g = ps.grid;
    const Field& u = solved.u;
    const Field& V = constrained_ref.u;
    ensure(u.size() == g.node_count() && V.size() == g.node_count(),
           "certify_by_picone: size mismatch");
    for (double v : u.values)
        ensure(v >= 0.0, "certify_by_picone: solved field must be nonnegative");

    PiconeCertificate cert;
    cert.reference_min = constrained_ref.objective;

    const double kin_u = energy(u, ps).kinetic;
    const double bound = std::pow(cert.reference_min, ps.q / ps.p) *
                         std::pow(kin_u, (ps.p - ps.q) / ps.p);

    for (double eps : eps_list) {
        ensure(eps > 0.0, "certify_by_picone: eps must be positive");
        PiconeCertificate::Step step;
        step.eps = eps;
        double mass = 0.0;
        for (int n = 0; n < g.node_count(); ++n) {
            const double frac = u[n] / (u[n] + eps);
            mass += g.node_weight(n) * ps.weight.a[n] *
                    std::pow(std::abs(V[n]), ps.q) * std::pow(frac, ps.q - 1.0);
        }
        step.weighted_mass = mass;
        step.bound = bound;
        step.slack = bound - mass;
        cert.steps.push_back(step);
    }

    const double sup = max_abs_value(u);
    double limit = 0.0;
    for (int n = 0; n < g.node_count(); ++n)
        if (u[n] > tau_zero * sup)
            limit += g.node_weight(n) * ps.weight.a[n] * std::pow(std::abs(V[n]), ps.q);
    cert.limit_mass = limit;

    const double cv = constraint_value(u, ps);
    cert.rayleigh_u =
        cv > 0.0 ? rayleigh(u, ps, ps.q) : std::numeric_limits<double>::infinity();
    cert.final_slack = cert.reference_min * (1.0 + tol) - cert.rayleigh_u;

    bool steps_ok = true;
    for (const auto& s : cert.steps)
        if (s.slack < -1e-8 * std::max(1.0, std::abs(s.bound))) steps_ok = false;
    cert.passed = steps_ok && cert.final_slack >= 0.0;
    return cert;
}

SweepTable q_sweep_asymptotics(const Grid& g, const WeightField& w, double p,
                               const std::vector<double>& q_list,
                               const SolveOptions& opts) {
    ensure(!q_list.empty(), "q_sweep_asymptotics: empty q list");
    for (std::size_t k = 0; k < q_list.size(); ++k) {
        ensure(q_list[k] > 1.0 && q_list[k] < p,
               "q_sweep_asymptotics: q values must lie in (1, p)");
        if (k > 0)
            ensure(q_list[k] > q_list[k - 1],
                   "q_sweep_asymptotics: q list must be strictly increasing");
    }

    SweepTable table;
    for (double q : q_list) {
        const ProblemSpec ps = make_problem(g, w, p, q);
        const SolveResult vres = minimize_constrained(ps, opts);
        SweepRow row;
        row.q = q;
        row.converged = vres.converged && vres.objective > 0.0;
        row.residual = vres.residual;
        row.iterations = vres.iterations;
        if (row.converged) {
            // Rescale the constrained minimizer to the global one:
            // C = m^(1/(q-p)) maps the unit-constraint minimizer onto the
            // energy minimizer, and the minimum itself is
            // (1/p - 1/q) m^(q/(q-p)).
            const double m = vres.objective;
            const double C = std::pow(m, 1.0 / (q - p));
            const PositivityReport rep = positivity_report(vres.u, ps);
            row.sup_norm = C * max_abs_value(vres.u);
            row.energy_value = (1.0 / p - 1.0 / q) * std::pow(m, q / (q - p));
            row.in_cone = rep.in_cone;
            row.min_on_positive_set = C * rep.min_on_positive_set;
            row.dead_core_count = static_cast<int>(rep.dead_core_nodes.size());
            row.u = vres.u;
            for (double& v : row.u.values) v *= C;
        }
        table.rows.push_back(row);
    }

    const std::size_t n = table.rows.size();
    const std::size_t start = n / 2;
    bool inc = true, dec = true;
    for (std::size_t k = start + 1; k < n; ++k) {
        if (!(table.rows[k].sup_norm > table.rows[k - 1].sup_norm)) inc = false;
        if (!(table.rows[k].sup_norm < table.rows[k - 1].sup_norm)) dec = false;
    }
    table.tail_trend = inc ? Trend::Increasing : (dec ? Trend::Decreasing : Trend::Mixed);
    return table;
}

}  // namespace plap
