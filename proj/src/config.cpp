#include "plap/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace plap {

std::string to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::Solve: return "solve";
        case ExperimentKind::Eigen: return "eigen";
        case ExperimentKind::Multistart: return "multistart";
        case ExperimentKind::Q0: return "q0";
        case ExperimentKind::Sweep: return "sweep";
        case ExperimentKind::Deadcore: return "deadcore";
        case ExperimentKind::Restricted: return "restricted";
        case ExperimentKind::Check: return "check";
    }
    return "?";
}

Grid ExperimentConfig::build() const { return build_grid(dim, lo, hi, nodes, bc); }

WeightField ExperimentConfig::weight_on(const Grid& g) const {
    if (weight.kind == WeightSpec::Kind::Tabulated && !weight_file.empty()) {
        std::ifstream in(weight_file);
        ensure(in.good(), "weight.file: cannot open '" + weight_file + "'");
        FieldDump d = load_field(in);
        ensure(d.grid.dim == g.dim && d.grid.nodes == g.nodes &&
                   d.grid.lo == g.lo && d.grid.hi == g.hi,
               "weight.file: dump grid does not match the problem grid");
        return weight_from_values(std::move(d.field.values), g);
    }
    return evaluate_weight(weight, g);
}

namespace {

struct Parser {
    std::map<std::string, std::string> kv;
    std::vector<std::string>* errors;

    void fail(const std::string& key, const std::string& msg) const {
        errors->push_back(key + ": " + msg);
    }

    bool has(const std::string& key) const { return kv.count(key) > 0; }

    std::string raw(const std::string& key) const {
        auto it = kv.find(key);
        return it == kv.end() ? std::string() : it->second;
    }

    bool to_double(const std::string& key, const std::string& text, double& out) const {
        try {
            std::size_t used = 0;
            out = std::stod(text, &used);
            if (used != text.size()) throw std::invalid_argument("trailing junk");
            return true;
        } catch (const std::exception&) {
            fail(key, "expected a real number, got '" + text + "'");
            return false;
        }
    }

    bool get_double(const std::string& key, double& out) const {
        if (!has(key)) return false;
        return to_double(key, raw(key), out);
    }

    bool get_int(const std::string& key, int& out) const {
        if (!has(key)) return false;
        try {
            std::size_t used = 0;
            out = std::stoi(raw(key), &used);
            if (used != raw(key).size()) throw std::invalid_argument("trailing junk");
            return true;
        } catch (const std::exception&) {
            fail(key, "expected an integer, got '" + raw(key) + "'");
            return false;
        }
    }

    std::vector<std::string> split(const std::string& text, char sep) const {
        std::vector<std::string> parts;
        std::string cur;
        for (char c : text) {
            if (c == sep) {
                parts.push_back(cur);
                cur.clear();
            } else {
                cur.push_back(c);
            }
        }
        parts.push_back(cur);
        for (auto& p : parts) {
            while (!p.empty() && p.front() == ' ') p.erase(p.begin());
            while (!p.empty() && p.back() == ' ') p.pop_back();
        }
        return parts;
    }

    bool get_double_list(const std::string& key, std::vector<double>& out) const {
        if (!has(key)) return false;
        out.clear();
        for (const std::string& part : split(raw(key), ',')) {
            double v = 0.0;
            if (!to_double(key, part, v)) return false;
            out.push_back(v);
        }
        return true;
    }
};

const char* const kKnownKeys[] = {
    "experiment",    "dim",           "extents",        "nodes",
    "bc",            "p",             "q",              "q_list",
    "weight.kind",   "weight.breakpoints", "weight.values", "weight.background",
    "weight.bumps",  "weight.file",   "solver.tol_grad", "solver.tol_energy",
    "solver.max_iter", "solver.eps",  "solver.seed",    "solver.init",
    "multistart.k",  "multistart.tol", "q0.tol",        "restricted.labels",
    "output.fields",
};

bool known_key(const std::string& k) {
    return std::find_if(std::begin(kKnownKeys), std::end(kKnownKeys),
                        [&](const char* s) { return k == s; }) != std::end(kKnownKeys);
}

bool needs_q(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::Eigen:
        case ExperimentKind::Q0:
        case ExperimentKind::Sweep:
            return false;
        default:
            return true;
    }
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

ParseOutcome parse_config(const std::string& text) {
    ParseOutcome out;
    Parser p;
    p.errors = &out.errors;

    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
        while (!line.empty() && is_space(line.front())) line.erase(line.begin());
        while (!line.empty() && is_space(line.back())) line.pop_back();
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            out.errors.push_back("line " + std::to_string(lineno) +
                                 ": expected 'key = value'");
            continue;
        }
        std::string key = line.substr(0, eq);
        std::string value = line.substr(eq + 1);
        while (!key.empty() && is_space(key.back())) key.pop_back();
        while (!value.empty() && is_space(value.front())) value.erase(value.begin());
        if (!known_key(key)) {
            out.errors.push_back(key + ": unknown key");
            continue;
        }
        if (p.kv.count(key)) {
            out.errors.push_back(key + ": duplicate key");
            continue;
        }
        p.kv[key] = value;
    }

    ExperimentConfig cfg;

    // experiment
    if (p.has("experiment")) {
        const std::string e = p.raw("experiment");
        bool matched = false;
        for (ExperimentKind k :
             {ExperimentKind::Solve, ExperimentKind::Eigen, ExperimentKind::Multistart,
              ExperimentKind::Q0, ExperimentKind::Sweep, ExperimentKind::Deadcore,
              ExperimentKind::Restricted, ExperimentKind::Check}) {
            if (e == to_string(k)) {
                cfg.experiment = k;
                matched = true;
            }
        }
        if (!matched) p.fail("experiment", "unknown experiment '" + e + "'");
    } else {
        p.fail("experiment", "missing (one of solve|eigen|multistart|q0|sweep|"
                             "deadcore|restricted|check)");
    }

    // grid
    if (!p.get_int("dim", cfg.dim)) p.fail("dim", "missing");
    if (cfg.dim != 1 && cfg.dim != 2) p.fail("dim", "must be 1 or 2");
    const int naxes = cfg.dim == 2 ? 2 : 1;

    if (p.has("extents")) {
        const auto axes = p.split(p.raw("extents"), ',');
        if (static_cast<int>(axes.size()) != naxes) {
            p.fail("extents", "need one lo:hi range per axis");
        } else {
            for (int a = 0; a < naxes; ++a) {
                const auto parts = p.split(axes[static_cast<std::size_t>(a)], ':');
                double lo = 0.0, hi = 0.0;
                if (parts.size() != 2 || !p.to_double("extents", parts[0], lo) ||
                    !p.to_double("extents", parts[1], hi)) {
                    p.fail("extents", "each axis must be lo:hi");
                } else if (hi <= lo) {
                    p.fail("extents", "degenerate range " + axes[static_cast<std::size_t>(a)]);
                } else {
                    cfg.lo[static_cast<std::size_t>(a)] = lo;
                    cfg.hi[static_cast<std::size_t>(a)] = hi;
                }
            }
        }
    } else {
        p.fail("extents", "missing");
    }

    if (p.has("nodes")) {
        const auto parts = p.split(p.raw("nodes"), ',');
        if (static_cast<int>(parts.size()) != naxes) {
            p.fail("nodes", "need one node count per axis");
        } else {
            for (int a = 0; a < naxes; ++a) {
                try {
                    cfg.nodes[static_cast<std::size_t>(a)] =
                        std::stoi(parts[static_cast<std::size_t>(a)]);
                } catch (const std::exception&) {
                    p.fail("nodes", "expected integers");
                }
                if (cfg.nodes[static_cast<std::size_t>(a)] < 3)
                    p.fail("nodes", "need at least 3 nodes per axis");
            }
        }
    } else {
        p.fail("nodes", "missing");
    }
    if (cfg.dim == 1) cfg.nodes[1] = 1;

    if (p.has("bc")) {
        const std::string b = p.raw("bc");
        if (b == "dirichlet") cfg.bc = BoundaryMode::Dirichlet;
        else if (b == "neumann") cfg.bc = BoundaryMode::Neumann;
        else p.fail("bc", "must be dirichlet or neumann");
    } else {
        p.fail("bc", "missing");
    }

    // exponents
    if (!p.get_double("p", cfg.p)) p.fail("p", "missing");
    if (cfg.p <= 1.0) p.fail("p", "must exceed 1");

    const bool q_given = p.get_double("q", cfg.q);
    if (needs_q(cfg.experiment)) {
        if (!q_given) p.fail("q", "missing");
        else if (!(cfg.q > 1.0 && cfg.q < cfg.p))
            p.fail("q", "q must lie in (1,p)");
    } else if (cfg.experiment == ExperimentKind::Eigen) {
        if (q_given && cfg.q != cfg.p)
            p.fail("q", "the eigen experiment fixes q = p; drop the key");
        cfg.q = cfg.p;
    }
    if (cfg.experiment == ExperimentKind::Sweep) {
        if (!p.get_double_list("q_list", cfg.q_list) || cfg.q_list.empty()) {
            p.fail("q_list", "missing (sweep needs a strictly increasing list)");
        } else {
            for (std::size_t k = 0; k < cfg.q_list.size(); ++k) {
                if (!(cfg.q_list[k] > 1.0 && cfg.q_list[k] < cfg.p))
                    p.fail("q_list", "q must lie in (1,p)");
                if (k > 0 && cfg.q_list[k] <= cfg.q_list[k - 1])
                    p.fail("q_list", "must be strictly increasing");
            }
            cfg.q = cfg.q_list.front();
        }
    } else if (p.has("q_list")) {
        p.fail("q_list", "only valid for the sweep experiment");
    }
    if (cfg.experiment == ExperimentKind::Q0 && !q_given)
        cfg.q = 1.0 + 0.5 * (cfg.p - 1.0);  // placeholder; q0 sweeps q itself

    // weight
    if (p.has("weight.kind")) {
        const std::string k = p.raw("weight.kind");
        if (k == "piecewise") {
            cfg.weight.kind = WeightSpec::Kind::PiecewiseIntervals;
            if (cfg.dim != 1) p.fail("weight.kind", "piecewise weights are 1-D only");
            if (!p.get_double_list("weight.breakpoints", cfg.weight.breakpoints))
                p.fail("weight.breakpoints", "missing");
            if (!p.get_double_list("weight.values", cfg.weight.interval_values))
                p.fail("weight.values", "missing");
            if (!cfg.weight.breakpoints.empty() &&
                cfg.weight.interval_values.size() != cfg.weight.breakpoints.size() + 1)
                p.fail("weight.values", "need one more value than breakpoints");
            if (!std::is_sorted(cfg.weight.breakpoints.begin(),
                                cfg.weight.breakpoints.end()))
                p.fail("weight.breakpoints", "must be increasing");
        } else if (k == "bumps") {
            cfg.weight.kind = WeightSpec::Kind::Bumps;
            if (!p.get_double("weight.background", cfg.weight.background))
                p.fail("weight.background", "missing");
            if (!p.has("weight.bumps")) {
                p.fail("weight.bumps", "missing (center[,center]:radius:amplitude; ...)");
            } else {
                for (const std::string& btxt : p.split(p.raw("weight.bumps"), ';')) {
                    const auto fields = p.split(btxt, ':');
                    Bump b;
                    bool ok = fields.size() == 3;
                    if (ok) {
                        const auto c = p.split(fields[0], ',');
                        ok = static_cast<int>(c.size()) == naxes;
                        for (int a = 0; ok && a < naxes; ++a)
                            ok = p.to_double("weight.bumps", c[static_cast<std::size_t>(a)],
                                             b.center[static_cast<std::size_t>(a)]);
                        ok = ok && p.to_double("weight.bumps", fields[1], b.radius) &&
                             p.to_double("weight.bumps", fields[2], b.amplitude);
                    }
                    if (!ok) {
                        p.fail("weight.bumps", "malformed bump '" + btxt + "'");
                    } else if (b.radius <= 0.0) {
                        p.fail("weight.bumps", "bump radius must be positive");
                    } else {
                        cfg.weight.bumps.push_back(b);
                    }
                }
            }
        } else if (k == "tabulated") {
            cfg.weight.kind = WeightSpec::Kind::Tabulated;
            if (!p.has("weight.file")) p.fail("weight.file", "missing");
            else cfg.weight_file = p.raw("weight.file");
        } else {
            p.fail("weight.kind", "must be piecewise, bumps, or tabulated");
        }
    } else {
        p.fail("weight.kind", "missing");
    }

    // solver
    p.get_double("solver.tol_grad", cfg.solver.tol_grad);
    if (cfg.solver.tol_grad <= 0.0) p.fail("solver.tol_grad", "must be positive");
    p.get_double("solver.tol_energy", cfg.solver.tol_energy);
    if (cfg.solver.tol_energy <= 0.0) p.fail("solver.tol_energy", "must be positive");
    p.get_int("solver.max_iter", cfg.solver.max_iter);
    if (cfg.solver.max_iter < 1) p.fail("solver.max_iter", "must be at least 1");
    p.get_double("solver.eps", cfg.solver.eps);
    if (cfg.solver.eps < 0.0) p.fail("solver.eps", "must be >= 0");
    if (p.has("solver.seed")) {
        int s = 0;
        if (p.get_int("solver.seed", s)) cfg.solver.seed = static_cast<std::uint64_t>(s);
    }
    if (p.has("solver.init")) {
        const std::string s = p.raw("solver.init");
        if (s == "random") cfg.solver.init = InitKind::RandomPositive;
        else if (s == "indicator") cfg.solver.init = InitKind::IndicatorPositiveSet;
        else p.fail("solver.init", "must be random or indicator");
    }

    // experiment parameters
    p.get_int("multistart.k", cfg.multistart_k);
    if (cfg.experiment == ExperimentKind::Multistart && cfg.multistart_k < 2)
        p.fail("multistart.k", "must be at least 2");
    p.get_double("multistart.tol", cfg.multistart_tol);
    p.get_double("q0.tol", cfg.q0_tol);
    if (cfg.q0_tol <= 0.0) p.fail("q0.tol", "must be positive");
    if (p.has("restricted.labels")) {
        for (const std::string& part : p.split(p.raw("restricted.labels"), ',')) {
            try {
                cfg.restricted_labels.push_back(std::stoi(part));
            } catch (const std::exception&) {
                p.fail("restricted.labels", "expected integers");
            }
        }
    }
    if (cfg.experiment == ExperimentKind::Restricted && cfg.restricted_labels.empty())
        p.fail("restricted.labels", "missing (nonempty component list required)");
    if (p.has("output.fields")) {
        const std::string v = p.raw("output.fields");
        if (v == "true") cfg.write_fields = true;
        else if (v == "false") cfg.write_fields = false;
        else p.fail("output.fields", "must be true or false");
    }

    // Physical validation needs the evaluated weight; skip if the schema
    // already failed.
    if (out.errors.empty()) {
        try {
            const Grid g = cfg.build();
            const WeightField w = cfg.weight_on(g);
            if (cfg.experiment == ExperimentKind::Eigen) {
                bool has_pos = false;
                for (double v : w.a.values) has_pos = has_pos || v > 0.0;
                if (!has_pos)
                    p.fail("weight", "eigen experiment needs a weight with a "
                                     "positive part");
            } else if (!w.changes_sign) {
                p.fail("weight", "weight must change sign (both a > 0 and a < 0 "
                                 "somewhere)");
            }
            if (cfg.bc == BoundaryMode::Neumann && !neumann_admissible(w, g))
                p.fail("bc", "neumann requires int a < 0 (necessary for a positive "
                             "solution); this weight integrates to " +
                                 fmt(integrate_nodes(w.a, g)));
            for (int label : cfg.restricted_labels)
                if (label < 1 || label > w.n_components)
                    p.fail("restricted.labels",
                           "label " + std::to_string(label) + " does not exist (" +
                               std::to_string(w.n_components) + " components)");
        } catch (const std::exception& e) {
            out.errors.push_back(std::string("problem: ") + e.what());
        }
    }

    if (out.errors.empty()) out.config = std::move(cfg);
    return out;
}

ParseOutcome parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in.good()) {
        ParseOutcome out;
        out.errors.push_back("cannot open config file '" + path + "'");
        return out;
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string manifest_text(const ExperimentConfig& cfg) {
    std::ostringstream m;
    m << "csv_version = 1\n";
    m << "experiment = " << to_string(cfg.experiment) << '\n';
    m << "dim = " << cfg.dim << '\n';
    m << "extents = " << fmt(cfg.lo[0]) << ':' << fmt(cfg.hi[0]);
    if (cfg.dim == 2) m << ',' << fmt(cfg.lo[1]) << ':' << fmt(cfg.hi[1]);
    m << '\n';
    m << "nodes = " << cfg.nodes[0];
    if (cfg.dim == 2) m << ',' << cfg.nodes[1];
    m << '\n';
    m << "bc = " << (cfg.bc == BoundaryMode::Dirichlet ? "dirichlet" : "neumann") << '\n';
    m << "p = " << fmt(cfg.p) << '\n';
    if (cfg.experiment == ExperimentKind::Sweep) {
        m << "q_list =";
        for (std::size_t k = 0; k < cfg.q_list.size(); ++k)
            m << (k ? "," : " ") << fmt(cfg.q_list[k]);
        m << '\n';
    } else if (cfg.experiment != ExperimentKind::Q0) {
        m << "q = " << fmt(cfg.q) << '\n';
    }
    switch (cfg.weight.kind) {
        case WeightSpec::Kind::PiecewiseIntervals: {
            m << "weight.kind = piecewise\n";
            m << "weight.breakpoints =";
            for (std::size_t k = 0; k < cfg.weight.breakpoints.size(); ++k)
                m << (k ? "," : " ") << fmt(cfg.weight.breakpoints[k]);
            m << '\n';
            m << "weight.values =";
            for (std::size_t k = 0; k < cfg.weight.interval_values.size(); ++k)
                m << (k ? "," : " ") << fmt(cfg.weight.interval_values[k]);
            m << '\n';
            break;
        }
        case WeightSpec::Kind::Bumps: {
            m << "weight.kind = bumps\n";
            m << "weight.background = " << fmt(cfg.weight.background) << '\n';
            m << "weight.bumps =";
            for (std::size_t k = 0; k < cfg.weight.bumps.size(); ++k) {
                const Bump& b = cfg.weight.bumps[k];
                m << (k ? "; " : " ") << fmt(b.center[0]);
                if (cfg.dim == 2) m << ',' << fmt(b.center[1]);
                m << ':' << fmt(b.radius) << ':' << fmt(b.amplitude);
            }
            m << '\n';
            break;
        }
        case WeightSpec::Kind::Tabulated:
            m << "weight.kind = tabulated\n";
            m << "weight.file = " << cfg.weight_file << '\n';
            break;
    }
    m << "solver.tol_grad = " << fmt(cfg.solver.tol_grad) << '\n';
    m << "solver.tol_energy = " << fmt(cfg.solver.tol_energy) << '\n';
    m << "solver.max_iter = " << cfg.solver.max_iter << '\n';
    m << "solver.eps = " << fmt(cfg.solver.eps) << '\n';
    m << "solver.seed = " << cfg.solver.seed << '\n';
    m << "solver.init = "
      << (cfg.solver.init == InitKind::IndicatorPositiveSet ? "indicator" : "random")
      << '\n';
    if (cfg.experiment == ExperimentKind::Multistart) {
        m << "multistart.k = " << cfg.multistart_k << '\n';
        m << "multistart.tol = " << fmt(cfg.multistart_tol) << '\n';
    }
    if (cfg.experiment == ExperimentKind::Q0)
        m << "q0.tol = " << fmt(cfg.q0_tol) << '\n';
    if (cfg.experiment == ExperimentKind::Restricted) {
        m << "restricted.labels =";
        for (std::size_t k = 0; k < cfg.restricted_labels.size(); ++k)
            m << (k ? "," : " ") << cfg.restricted_labels[k];
        m << '\n';
    }
    m << "output.fields = " << (cfg.write_fields ? "true" : "false") << '\n';
    return m.str();
}

}  // namespace plap
