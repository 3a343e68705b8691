#include "plap/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>

namespace plap {

const char* const kResultsHeader =
    "q,p,mode,objective,residual,iterations,converged,min_on_positive_set,"
    "dead_core_count,in_cone";

namespace {

namespace fs = std::filesystem;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_short(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

const char* mode_name(SolveMode m) {
    switch (m) {
        case SolveMode::Global: return "global";
        case SolveMode::Constrained: return "constrained";
        case SolveMode::Restricted: return "restricted";
        case SolveMode::Eigen: return "eigen";
    }
    return "?";
}

double max_value(const Field& u) {
    double m = 0.0;
    for (double v : u.values) m = std::max(m, v);
    return m;
}

struct RunContext {
    RunContext(const ExperimentConfig& c, fs::path d) : cfg(c), dir(std::move(d)) {}

    const ExperimentConfig& cfg;
    fs::path dir;
    std::ofstream csv;
    bool quiet = false;
    bool ok = true;

    void say(const std::string& line) {
        if (!quiet) std::cout << line << '\n';
    }

    void fail(const std::string& why) {
        ok = false;
        if (!quiet) std::cout << "FAILED: " << why << '\n';
    }

    void row(double q, double p, const std::string& mode, double objective,
             double residual, int iterations, bool converged, double min_pos,
             int dead_count, bool in_cone) {
        csv << fmt(q) << ',' << fmt(p) << ',' << mode << ',' << fmt(objective) << ','
            << fmt(residual) << ',' << iterations << ',' << (converged ? 1 : 0) << ','
            << fmt(min_pos) << ',' << dead_count << ',' << (in_cone ? 1 : 0) << '\n';
    }

    void solve_row(const SolveResult& res, const ProblemSpec& ps, double q_col) {
        const PositivityReport rep = positivity_report(res.u, ps);
        row(q_col, ps.p, mode_name(res.mode), res.objective, res.residual,
            res.iterations, res.converged, rep.min_on_positive_set,
            static_cast<int>(rep.dead_core_nodes.size()), rep.in_cone);
    }

    void dump(const std::string& name, const Field& u, const Grid& g) {
        if (!cfg.write_fields) return;
        std::ofstream out(dir / name, std::ios::binary);
        dump_field(u, g, out);
    }

    std::ofstream report(const std::string& name) {
        return std::ofstream(dir / name, std::ios::binary);
    }
};

// ---------------------------------------------------------------------------
// experiments

void run_solve(RunContext& ctx, const ProblemSpec& ps) {
    const SolveResult res = minimize_global(ps, ctx.cfg.solver);
    ctx.solve_row(res, ps, ps.q);
    if (res.converged) ctx.dump("u_global.dat", res.u, ps.grid);
    if (!res.converged) ctx.fail("solver did not converge");
    else if (res.suspect_trivial || res.objective >= 0.0)
        ctx.fail("minimum is not negative (suspect trivial limit)");
    else
        ctx.say("global minimum " + fmt_short(res.objective) + " after " +
                std::to_string(res.iterations) + " iterations");
}

void run_eigen(RunContext& ctx, const ProblemSpec& ps) {
    const SolveResult res = principal_eigen(ps, ctx.cfg.solver);
    ctx.solve_row(res, ps, ps.p);
    if (res.converged) {
        // Reporting convention: eigenfunction normalized to max-norm 1.
        Field phi = res.u;
        const double sup = max_value(phi);
        if (sup > 0.0)
            for (double& v : phi.values) v /= sup;
        ctx.dump("phi1.dat", phi, ps.grid);
    }
    if (!res.converged) ctx.fail("eigen solve did not converge");
    else if (!(res.objective > 0.0) || res.suspect_trivial)
        ctx.fail("principal eigenvalue is not positive");
    else
        ctx.say("lambda_1 = " + fmt_short(res.objective));
}

void run_multistart(RunContext& ctx, const ProblemSpec& ps) {
    const UniquenessReport rep = multistart_uniqueness(
        ps, ctx.cfg.multistart_k, ctx.cfg.solver, ctx.cfg.multistart_tol);
    for (std::size_t k = 0; k < rep.runs.size(); ++k) {
        ctx.solve_row(rep.runs[k], ps, ps.q);
        if (rep.runs[k].converged)
            ctx.dump("u_run" + std::to_string(k) + ".dat", rep.runs[k].u, ps.grid);
    }
    auto rp = ctx.report("uniqueness.txt");
    rp << "runs = " << rep.runs.size() << '\n'
       << "tolerance = " << fmt(rep.tolerance) << '\n'
       << "max_pairwise_distance = " << fmt(rep.max_pairwise_distance) << '\n'
       << "agree = " << (rep.agree ? "true" : "false") << '\n'
       << "complete = " << (rep.complete ? "true" : "false") << '\n';
    if (!rep.complete) ctx.fail("at least one multistart run did not converge");
    else if (!rep.agree)
        ctx.fail("multistart minimizers disagree: max distance " +
                 fmt_short(rep.max_pairwise_distance));
    else
        ctx.say("all " + std::to_string(rep.runs.size()) +
                " starts agree within " + fmt_short(rep.tolerance) +
                " (max distance " + fmt_short(rep.max_pairwise_distance) + ")");
}

const char* q0_flag_name(Q0Flag f) {
    switch (f) {
        case Q0Flag::Bracketed: return "bracketed";
        case Q0Flag::AlwaysPositive: return "always_positive";
        case Q0Flag::NeverPositive: return "never_positive";
        case Q0Flag::NonMonotone: return "non_monotone";
    }
    return "?";
}

void run_q0(RunContext& ctx, const Grid& g, const WeightField& w) {
    const Q0Report rep =
        estimate_q0(g, w, ctx.cfg.p, ctx.cfg.solver, ctx.cfg.q0_tol);
    for (const Q0Probe& pr : rep.probes)
        ctx.row(pr.q, ctx.cfg.p, "global", pr.objective, pr.residual, pr.iterations,
                pr.converged, pr.min_on_positive_set, pr.dead_core_count, pr.in_cone);
    auto rp = ctx.report("q0.txt");
    rp << "q0 = " << fmt(rep.q0) << '\n'
       << "flag = " << q0_flag_name(rep.flag) << '\n'
       << "q_tol = " << fmt(ctx.cfg.q0_tol) << '\n'
       << "probes:\n";
    for (const Q0Probe& pr : rep.probes)
        rp << "  q = " << fmt(pr.q) << "  in_cone = " << (pr.in_cone ? 1 : 0)
           << "  converged = " << (pr.converged ? 1 : 0) << '\n';
    for (const Q0Probe& pr : rep.probes)
        if (!pr.converged)
            ctx.fail("probe at q = " + fmt_short(pr.q) + " did not converge");
    ctx.say("q0 = " + fmt_short(rep.q0) + " (" + q0_flag_name(rep.flag) + ")");
}

void run_sweep(RunContext& ctx, const Grid& g, const WeightField& w) {
    const SweepTable table =
        q_sweep_asymptotics(g, w, ctx.cfg.p, ctx.cfg.q_list, ctx.cfg.solver);
    auto norms = ctx.report("sweep_norm.dat");
    auto energies = ctx.report("sweep_energy.dat");
    for (const SweepRow& r : table.rows) {
        ctx.row(r.q, ctx.cfg.p, "global", r.energy_value, r.residual, r.iterations,
                r.converged, r.min_on_positive_set, r.dead_core_count, r.in_cone);
        norms << fmt(r.q) << ' ' << fmt(r.sup_norm) << '\n';
        energies << fmt(r.q) << ' ' << fmt(r.energy_value) << '\n';
        if (r.converged) ctx.dump("u_q" + fmt_short(r.q) + ".dat", r.u, g);
        else ctx.fail("sweep entry q = " + fmt_short(r.q) + " did not converge");
    }
    const char* trend = table.tail_trend == Trend::Increasing   ? "increasing"
                        : table.tail_trend == Trend::Decreasing ? "decreasing"
                                                                : "mixed";
    auto rp = ctx.report("sweep.txt");
    rp << "tail_trend = " << trend << '\n';
    ctx.say(std::string("sup-norm tail trend: ") + trend);
}

void run_deadcore(RunContext& ctx, const ProblemSpec& ps) {
    const SolveResult res = minimize_global(ps, ctx.cfg.solver);
    ctx.solve_row(res, ps, ps.q);
    if (!res.converged) {
        ctx.fail("solver did not converge");
        return;
    }
    ctx.dump("u_global.dat", res.u, ps.grid);

    const PositivityReport rep = positivity_report(res.u, ps);
    int longest_run = 0;
    if (ps.grid.dim == 1) {
        int run = 0, prev = -2;
        for (int n : rep.dead_core_nodes) {
            run = (n == prev + 1) ? run + 1 : 1;
            longest_run = std::max(longest_run, run);
            prev = n;
        }
    }

    auto rp = ctx.report("deadcore.txt");
    rp << "dead_core_nodes = " << rep.dead_core_nodes.size() << '\n';
    if (ps.grid.dim == 1) rp << "longest_consecutive_run = " << longest_run << '\n';
    rp << "energy = " << fmt(res.objective) << '\n';

    bool any_flip = false;
    for (int label = 1; label <= ps.weight.n_components; ++label) {
        try {
            const Field flipped = flip_bump(res.u, ps.weight, label, ps.grid);
            const double e_flip = energy(flipped, ps).total;
            const double diff = std::abs(e_flip - res.objective);
            rp << "flip_component_" << label << " = ok, |energy difference| = "
               << fmt(diff) << '\n';
            if (!any_flip) ctx.dump("u_flipped.dat", flipped, ps.grid);
            any_flip = true;
            if (diff > 1e-10)
                ctx.fail("flipped field changed the energy by " + fmt_short(diff));
        } catch (const std::exception& e) {
            rp << "flip_component_" << label << " = skipped (" << e.what() << ")\n";
        }
    }
    if (!any_flip)
        ctx.fail("no bump could be flipped (supports not separated)");
    else
        ctx.say("dead core of " + std::to_string(rep.dead_core_nodes.size()) +
                " nodes; sign-flipped minimizer reproduces the energy");
}

void run_restricted(RunContext& ctx, const ProblemSpec& ps) {
    const SolveResult full = minimize_constrained(ps, ctx.cfg.solver);
    const SolveResult part =
        minimize_restricted(ps, ctx.cfg.restricted_labels, ctx.cfg.solver);
    ctx.solve_row(full, ps, ps.q);
    ctx.solve_row(part, ps, ps.q);
    if (full.converged) ctx.dump("v_constrained.dat", full.u, ps.grid);
    if (part.converged) ctx.dump("v_restricted.dat", part.u, ps.grid);

    auto rp = ctx.report("restricted.txt");
    rp << "m = " << fmt(full.objective) << '\n'
       << "m_restricted = " << fmt(part.objective) << '\n';

    if (!full.converged || !part.converged) ctx.fail("a solve did not converge");
    else if (part.objective < full.objective -
                                   1e-6 * std::max(1.0, full.objective))
        ctx.fail("restricted minimum fell below the unrestricted one");
    else
        ctx.say("m = " + fmt_short(full.objective) +
                ", m_restricted = " + fmt_short(part.objective));
}

// ---------------------------------------------------------------------------
// check experiment: the invariant suite on the configured problem

struct CheckLine {
    std::string name;
    bool pass = false;
    std::string detail;
};

Field random_field(const Grid& g, std::mt19937_64& rng, double lo, double hi,
                   bool admissible) {
    std::uniform_real_distribution<double> dist(lo, hi);
    Field u = make_field(g);
    for (int n = 0; n < g.node_count(); ++n) u[n] = dist(rng);
    return admissible ? enforce_boundary(u, g) : u;
}

std::vector<CheckLine> invariant_suite(const ExperimentConfig& cfg, const Grid& g,
                                       const WeightField& w) {
    std::vector<CheckLine> lines;
    auto add = [&](const std::string& name, bool pass, const std::string& detail) {
        lines.push_back({name, pass, detail});
    };
    std::mt19937_64 rng(cfg.solver.seed);
    const ProblemSpec ps = make_problem(g, w, cfg.p, cfg.q);

    {  // trapezoid rule integrates constants to the exact volume
        const double v = integrate_nodes(make_field(g, 1.0), g);
        const double rel = std::abs(v - g.volume()) / g.volume();
        add("quadrature_volume", rel <= 1e-12, "rel err " + fmt_short(rel));
    }
    {  // gradient linearity
        const Field a = random_field(g, rng, -1.0, 1.0, false);
        const Field b = random_field(g, rng, -1.0, 1.0, false);
        Field combo = make_field(g);
        for (int n = 0; n < g.node_count(); ++n) combo[n] = 0.7 * a[n] - 1.3 * b[n];
        const CellVectorField ga = gradient(a, g), gb = gradient(b, g),
                              gc = gradient(combo, g);
        double err = 0.0, scale = 1.0;
        for (int c = 0; c < gc.size(); ++c) {
            err = std::max(err, std::abs(gc.x[static_cast<std::size_t>(c)] -
                                         (0.7 * ga.x[static_cast<std::size_t>(c)] -
                                          1.3 * gb.x[static_cast<std::size_t>(c)])));
            scale = std::max(scale, std::abs(gc.x[static_cast<std::size_t>(c)]));
            if (g.dim == 2) {
                err = std::max(err, std::abs(gc.y[static_cast<std::size_t>(c)] -
                                             (0.7 * ga.y[static_cast<std::size_t>(c)] -
                                              1.3 * gb.y[static_cast<std::size_t>(c)])));
                scale = std::max(scale, std::abs(gc.y[static_cast<std::size_t>(c)]));
            }
        }
        add("gradient_linearity", err <= 1e-14 * scale, "max err " + fmt_short(err));
    }
    {  // constant fields have zero gradient
        const CellVectorField gc = gradient(make_field(g, 3.7), g);
        bool zero = true;
        for (int c = 0; c < gc.size(); ++c)
            if (gc.x[static_cast<std::size_t>(c)] != 0.0 ||
                (g.dim == 2 && gc.y[static_cast<std::size_t>(c)] != 0.0))
                zero = false;
        add("constant_gradient_zero", zero, zero ? "exact" : "nonzero entry");
    }
    {  // kinetic/potential homogeneity of degree p and q
        const Field u = random_field(g, rng, 0.5, 1.5, true);
        Field u2 = u;
        for (double& v : u2.values) v *= 2.0;
        const EnergyBreakdown e1 = energy(u, ps), e2 = energy(u2, ps);
        const double rk = std::abs(e2.kinetic - std::pow(2.0, ps.p) * e1.kinetic) /
                          std::max(1e-300, std::abs(e2.kinetic));
        const double rp = std::abs(e2.potential - std::pow(2.0, ps.q) * e1.potential) /
                          std::max(1e-300, std::abs(e2.potential));
        add("energy_scaling", rk <= 1e-12 && rp <= 1e-12,
            "kinetic " + fmt_short(rk) + ", potential " + fmt_short(rp));
    }
    {  // energy(|u|) == energy(u) for node-aligned sign changes
        Field u = random_field(g, rng, 0.5, 1.5, true);
        const int cut = g.nodes[0] / 2;
        for (int n = 0; n < g.node_count(); ++n) {
            const int i = g.dim == 1 ? n : n / g.nodes[1];
            if (i == cut) u[n] = 0.0;
            if (i > cut) u[n] = -u[n];
        }
        Field au = u;
        for (double& v : au.values) v = std::abs(v);
        const EnergyBreakdown eu = energy(u, ps), ea = energy(au, ps);
        const double rel =
            std::max(std::abs(eu.kinetic - ea.kinetic) /
                         std::max(1.0, std::abs(eu.kinetic)),
                     std::abs(eu.potential - ea.potential) /
                         std::max(1.0, std::abs(eu.potential)));
        add("energy_abs_identity", rel <= 1e-14, "rel err " + fmt_short(rel));
    }
    {  // analytic gradient vs central differences
        const Field u = random_field(g, rng, 0.5, 1.5, true);
        const Field grad = energy_gradient(u, ps, 1e-8);
        std::uniform_int_distribution<int> pick(0, g.node_count() - 1);
        double worst = 0.0;
        int checked = 0;
        while (checked < 20) {
            const int n = pick(rng);
            if (g.bc == BoundaryMode::Dirichlet && g.is_boundary(n)) continue;
            ++checked;
            const double delta = 1e-5;
            Field up = u, um = u;
            up[n] += delta;
            um[n] -= delta;
            const double fd =
                (energy(up, ps).total - energy(um, ps).total) / (2.0 * delta);
            const double rel = std::abs(fd - grad[n]) /
                               std::max({std::abs(fd), std::abs(grad[n]), 1e-8});
            worst = std::max(worst, rel);
        }
        add("gradient_vs_fd", worst <= 1e-5, "worst rel err " + fmt_short(worst));
    }
    {  // rayleigh(u, q) equals the projected kinetic value
        Field u = make_field(g);
        const Field noise = random_field(g, rng, 0.0, 0.2, true);
        for (int n = 0; n < g.node_count(); ++n)
            u[n] = (w.a[n] > 0.0 ? 1.0 : 0.0) + noise[n];
        u = enforce_boundary(u, g);
        const double cv = constraint_value(u, ps);
        if (cv <= 0.0) {
            add("rayleigh_projection", false, "random field left the constraint cone");
        } else {
            const double r1 = rayleigh(u, ps, ps.q);
            const double r2 = energy(project_to_Sa(u, ps), ps).kinetic;
            const double rel = std::abs(r1 - r2) / std::max(r1, 1e-300);
            add("rayleigh_projection", rel <= 1e-12, "rel err " + fmt_short(rel));
        }
    }
    {  // hidden convexity inequality, random sweep
        std::uniform_real_distribution<double> unit(0.0, 1.0), comp(-1.0, 1.0);
        double min_gap = std::numeric_limits<double>::infinity();
        for (int k = 0; k < 100000; ++k) {
            const double pp = 1.1 + 2.9 * unit(rng);
            const double qq = 1.0 + (pp - 1.0) * unit(rng);
            const double s = unit(rng);
            const double a1 = std::pow(s, 1.0 / qq);
            const double a2 = std::pow(1.0 - s, 1.0 / qq);
            const double e1[2] = {comp(rng), comp(rng)};
            const double e2[2] = {comp(rng), comp(rng)};
            min_gap = std::min(min_gap, hidden_convexity_gap(a1, a2, e1, e2, pp, qq));
        }
        add("hidden_convexity", min_gap >= 0.0, "min gap " + fmt_short(min_gap));
    }
    {  // cellwise Picone inequality on a small 1-D grid
        const Grid pg = grid_1d(0.0, 1.0, 21, BoundaryMode::Neumann);
        const ProblemSpec pps = make_problem(
            pg, weight_from_values(std::vector<double>(21, 1.0), pg), ps.p, ps.q);
        double min_gap = std::numeric_limits<double>::infinity();
        for (int k = 0; k < 1000; ++k) {
            const Field u = random_field(pg, rng, 0.2, 1.2, false);
            const Field v = random_field(pg, rng, 0.2, 1.2, false);
            for (double gap : picone_gap(u, v, pps, 1e-3))
                min_gap = std::min(min_gap, gap);
        }
        add("picone_gap", min_gap >= -1e-8, "min cell gap " + fmt_short(min_gap));
    }
    {  // Hoelder step of the certification chain, random sweep
        double min_slack = std::numeric_limits<double>::infinity();
        for (int k = 0; k < 1000; ++k) {
            const Field u = random_field(g, rng, -1.0, 1.0, false);
            const Field v = random_field(g, rng, -1.0, 1.0, false);
            const CellVectorField gu = gradient(u, g), gv = gradient(v, g);
            double lhs = 0.0;
            for (int c = 0; c < gu.size(); ++c)
                lhs += std::pow(gu.magnitude(c), ps.p - ps.q) *
                       std::pow(gv.magnitude(c), ps.q);
            lhs *= g.cell_volume();
            const double rhs = std::pow(energy(u, ps).kinetic, (ps.p - ps.q) / ps.p) *
                               std::pow(energy(v, ps).kinetic, ps.q / ps.p);
            min_slack = std::min(min_slack,
                                 (rhs - lhs) / std::max(1.0, std::abs(rhs)));
        }
        add("holder_step", min_slack >= -1e-12, "min rel slack " + fmt_short(min_slack));
    }

    // Solver-level identities share one pair of solves.
    const SolveResult global = minimize_global(ps, cfg.solver);
    const SolveResult constrained = minimize_constrained(ps, cfg.solver);
    {
        const double m = constrained.objective;
        const double predicted =
            (1.0 / ps.p - 1.0 / ps.q) * std::pow(m, ps.q / (ps.q - ps.p));
        const double rel = std::abs(global.objective - predicted) /
                           std::max(std::abs(global.objective), 1e-300);
        add("energy_identity", global.converged && constrained.converged && rel <= 1e-3,
            "M " + fmt_short(global.objective) + " vs predicted " +
                fmt_short(predicted));
    }
    {
        const PositivityReport rep = positivity_report(global.u, ps);
        add("positive_on_positive_set",
            global.converged && rep.min_on_positive_set > 0.0,
            "min " + fmt_short(rep.min_on_positive_set));
    }
    {
        const double m = constrained.objective;
        const double C = std::pow(m, 1.0 / (ps.q - ps.p));
        Field scaled = constrained.u;
        for (double& v : scaled.values) v *= C;
        const double e = energy(scaled, ps).total;
        const double rel = std::abs(e - global.objective) /
                           std::max(std::abs(global.objective), 1e-300);
        add("rescaling_identity", rel <= 1e-6, "rel err " + fmt_short(rel));
    }
    {
        const SolveResult again = minimize_global(ps, cfg.solver);
        const bool same = again.objective == global.objective &&
                          again.iterations == global.iterations &&
                          again.u.values == global.u.values;
        add("determinism", same, same ? "bit-identical rerun" : "rerun differs");
    }
    return lines;
}

void run_check(RunContext& ctx, const Grid& g, const WeightField& w) {
    const std::vector<CheckLine> lines = invariant_suite(ctx.cfg, g, w);
    auto rp = ctx.report("check.txt");
    for (const CheckLine& l : lines) {
        const std::string text =
            std::string(l.pass ? "PASS" : "FAIL") + "  " + l.name + "  (" + l.detail +
            ")";
        rp << text << '\n';
        ctx.say(text);
        if (!l.pass) ctx.ok = false;
    }
    // One CSV row so every run produces a result table.
    const ProblemSpec ps = make_problem(g, w, ctx.cfg.p, ctx.cfg.q);
    const SolveResult res = minimize_global(ps, ctx.cfg.solver);
    ctx.solve_row(res, ps, ps.q);
}

}  // namespace

int run_experiment(const ExperimentConfig& cfg, const std::string& out_dir,
                   bool quiet) {
    RunContext ctx(cfg, fs::path(out_dir));
    ctx.quiet = quiet;
    fs::create_directories(ctx.dir);

    {
        std::ofstream manifest(ctx.dir / "manifest.txt", std::ios::binary);
        manifest << manifest_text(cfg);
    }
    ctx.csv.open(ctx.dir / "results.csv", std::ios::binary);
    ctx.csv << kResultsHeader << '\n';

    const Grid g = cfg.build();
    const WeightField w = cfg.weight_on(g);

    switch (cfg.experiment) {
        case ExperimentKind::Solve:
            run_solve(ctx, make_problem(g, w, cfg.p, cfg.q));
            break;
        case ExperimentKind::Eigen:
            run_eigen(ctx, make_problem(g, w, cfg.p, cfg.p));
            break;
        case ExperimentKind::Multistart:
            run_multistart(ctx, make_problem(g, w, cfg.p, cfg.q));
            break;
        case ExperimentKind::Q0:
            run_q0(ctx, g, w);
            break;
        case ExperimentKind::Sweep:
            run_sweep(ctx, g, w);
            break;
        case ExperimentKind::Deadcore:
            run_deadcore(ctx, make_problem(g, w, cfg.p, cfg.q));
            break;
        case ExperimentKind::Restricted:
            run_restricted(ctx, make_problem(g, w, cfg.p, cfg.q));
            break;
        case ExperimentKind::Check:
            run_check(ctx, g, w);
            break;
    }
    return ctx.ok ? 0 : 1;
}

}  // namespace plap
