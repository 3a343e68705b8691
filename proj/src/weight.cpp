#include "plap/weight.hpp"

#include <algorithm>
#include <cmath>

namespace plap {

namespace {

double bump_value(const Bump& b, double x, double y, int dim) {
    double d2 = (x - b.center[0]) * (x - b.center[0]);
    if (dim == 2) d2 += (y - b.center[1]) * (y - b.center[1]);
    const double t = 1.0 - d2 / (b.radius * b.radius);
    if (t <= 0.0) return 0.0;
    return b.amplitude * t * t;
}

double piecewise_value(const WeightSpec& spec, double x) {
    std::size_t j = 0;
    while (j < spec.breakpoints.size() && x >= spec.breakpoints[j]) ++j;
    return spec.interval_values[j];
}

}  // namespace

// Depth-first labeling in lexicographic start order, so numbering is
// deterministic.
MaskLabels label_mask(const std::vector<std::uint8_t>& mask, const Grid& g) {
    ensure(static_cast<int>(mask.size()) == g.node_count(),
           "label_mask: mask/grid size mismatch");
    const int n = g.node_count();
    MaskLabels out;
    out.labels.assign(static_cast<std::size_t>(n), 0);

    std::vector<int> stack;
    for (int start = 0; start < n; ++start) {
        if (!mask[static_cast<std::size_t>(start)] ||
            out.labels[static_cast<std::size_t>(start)] != 0)
            continue;
        const int label = ++out.count;
        stack.push_back(start);
        out.labels[static_cast<std::size_t>(start)] = label;
        while (!stack.empty()) {
            const int node = stack.back();
            stack.pop_back();
            auto visit = [&](int nb) {
                if (mask[static_cast<std::size_t>(nb)] &&
                    out.labels[static_cast<std::size_t>(nb)] == 0) {
                    out.labels[static_cast<std::size_t>(nb)] = label;
                    stack.push_back(nb);
                }
            };
            if (g.dim == 1) {
                if (node > 0) visit(node - 1);
                if (node + 1 < n) visit(node + 1);
            } else {
                const int ny = g.nodes[1];
                const int i = node / ny, j = node % ny;
                if (i > 0) visit(node - ny);
                if (i + 1 < g.nodes[0]) visit(node + ny);
                if (j > 0) visit(node - 1);
                if (j + 1 < ny) visit(node + 1);
            }
        }
    }
    return out;
}

WeightField weight_from_values(std::vector<double> values, const Grid& g) {
    WeightField w;
    w.a = make_field(g, std::move(values));
    bool has_pos = false, has_neg = false;
    std::vector<std::uint8_t> positive(w.a.values.size(), 0);
    for (std::size_t n = 0; n < w.a.values.size(); ++n) {
        const double v = w.a.values[n];
        if (v > 0.0) positive[n] = 1;
        has_pos = has_pos || v > 0.0;
        has_neg = has_neg || v < 0.0;
    }
    w.changes_sign = has_pos && has_neg;
    MaskLabels ml = label_mask(positive, g);
    w.labels = std::move(ml.labels);
    w.n_components = ml.count;
    return w;
}

WeightField evaluate_weight(const WeightSpec& spec, const Grid& g) {
    std::vector<double> vals(static_cast<std::size_t>(g.node_count()), 0.0);
    switch (spec.kind) {
        case WeightSpec::Kind::Tabulated:
            ensure(static_cast<int>(spec.tabulated.size()) == g.node_count(),
                   "evaluate_weight: tabulated values do not match grid");
            vals = spec.tabulated;
            break;
        case WeightSpec::Kind::Bumps: {
            for (const Bump& b : spec.bumps) {
                ensure(b.radius > 0.0, "evaluate_weight: bump radius must be > 0");
                for (int a = 0; a < g.dim; ++a)
                    ensure(b.center[a] >= g.lo[a] && b.center[a] <= g.hi[a],
                           "evaluate_weight: bump center outside domain");
            }
            for (int n = 0; n < g.node_count(); ++n) {
                const int i = g.dim == 1 ? n : n / g.nodes[1];
                const int j = g.dim == 1 ? 0 : n % g.nodes[1];
                const double x = g.coord(0, i);
                const double y = g.dim == 2 ? g.coord(1, j) : 0.0;
                double v = spec.background;
                for (const Bump& b : spec.bumps) v += bump_value(b, x, y, g.dim);
                vals[static_cast<std::size_t>(n)] = v;
            }
            break;
        }
        case WeightSpec::Kind::PiecewiseIntervals: {
            ensure(g.dim == 1, "evaluate_weight: piecewise intervals are 1-D only");
            ensure(spec.interval_values.size() == spec.breakpoints.size() + 1,
                   "evaluate_weight: need one more value than breakpoints");
            ensure(std::is_sorted(spec.breakpoints.begin(), spec.breakpoints.end()),
                   "evaluate_weight: breakpoints must be increasing");
            for (double b : spec.breakpoints)
                ensure(b > g.lo[0] && b < g.hi[0],
                       "evaluate_weight: breakpoint outside domain interior");
            for (int n = 0; n < g.node_count(); ++n)
                vals[static_cast<std::size_t>(n)] = piecewise_value(spec, g.coord(0, n));
            break;
        }
    }
    return weight_from_values(std::move(vals), g);
}

bool neumann_admissible(const WeightField& w, const Grid& g) {
    return integrate_nodes(w.a, g) < 0.0;
}

std::vector<std::uint8_t> component_mask(const WeightField& w,
                                         const std::vector<int>& keep) {
    std::vector<std::uint8_t> in_keep(static_cast<std::size_t>(w.n_components) + 1, 0);
    for (int label : keep) {
        ensure(label >= 1 && label <= w.n_components,
               "component_mask: unknown component label");
        in_keep[static_cast<std::size_t>(label)] = 1;
    }
    std::vector<std::uint8_t> mask(w.labels.size(), 0);
    for (std::size_t n = 0; n < w.labels.size(); ++n) {
        const int label = w.labels[n];
        if (label > 0 && !in_keep[static_cast<std::size_t>(label)]) mask[n] = 1;
    }
    return mask;
}

}  // namespace plap
