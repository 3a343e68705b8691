#include "plap/grid.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace plap {

double Grid::node_weight(int flat) const {
    const int i = dim == 1 ? flat : flat / nodes[1];
    double w = spacing[0] * ((i == 0 || i == nodes[0] - 1) ? 0.5 : 1.0);
    if (dim == 2) {
        const int j = flat % nodes[1];
        w *= spacing[1] * ((j == 0 || j == nodes[1] - 1) ? 0.5 : 1.0);
    }
    return w;
}

bool Grid::same_layout(const Grid& o) const {
    if (dim != o.dim || bc != o.bc) return false;
    for (int a = 0; a < dim; ++a) {
        if (nodes[a] != o.nodes[a] || lo[a] != o.lo[a] || hi[a] != o.hi[a])
            return false;
    }
    return true;
}

double CellVectorField::magnitude(int c) const {
    const double gx = x[static_cast<std::size_t>(c)];
    if (dim == 1) return std::abs(gx);
    const double gy = y[static_cast<std::size_t>(c)];
    return std::sqrt(gx * gx + gy * gy);
}

Grid build_grid(int dim, std::array<double, 2> lo, std::array<double, 2> hi,
                std::array<int, 2> nodes, BoundaryMode bc) {
    ensure(dim == 1 || dim == 2, "build_grid: dim must be 1 or 2");
    Grid g;
    g.dim = dim;
    g.bc = bc;
    if (dim == 1) {
        nodes[1] = 1;
        lo[1] = 0.0;
        hi[1] = 0.0;
    }
    for (int a = 0; a < dim; ++a) {
        ensure(nodes[a] >= 3, "build_grid: need at least 3 nodes per axis");
        ensure(hi[a] > lo[a], "build_grid: degenerate extents (hi must exceed lo)");
        g.nodes[a] = nodes[a];
        g.lo[a] = lo[a];
        g.hi[a] = hi[a];
        g.spacing[a] = (hi[a] - lo[a]) / (nodes[a] - 1);
    }
    if (dim == 1) {
        g.nodes[1] = 1;
        g.spacing[1] = 0.0;
    }
    return g;
}

Grid grid_1d(double lo, double hi, int nodes, BoundaryMode bc) {
    return build_grid(1, {lo, 0.0}, {hi, 0.0}, {nodes, 1}, bc);
}

Grid grid_2d(double lox, double hix, int nx, double loy, double hiy, int ny,
             BoundaryMode bc) {
    return build_grid(2, {lox, loy}, {hix, hiy}, {nx, ny}, bc);
}

Field make_field(const Grid& g, double fill) {
    Field f;
    f.values.assign(static_cast<std::size_t>(g.node_count()), fill);
    return f;
}

Field make_field(const Grid& g, std::vector<double> values) {
    ensure(static_cast<int>(values.size()) == g.node_count(),
           "make_field: value count does not match grid");
    Field f;
    f.values = std::move(values);
    return f;
}

CellVectorField gradient(const Field& u, const Grid& g) {
    ensure(u.size() == g.node_count(), "gradient: field/grid size mismatch");
    CellVectorField cv;
    cv.dim = g.dim;
    if (g.dim == 1) {
        const double inv_h = 1.0 / g.spacing[0];
        cv.x.resize(static_cast<std::size_t>(g.cells(0)));
        for (int c = 0; c < g.cells(0); ++c)
            cv.x[static_cast<std::size_t>(c)] = (u[c + 1] - u[c]) * inv_h;
        return cv;
    }
    const int ny = g.nodes[1];
    const double inv_hx = 1.0 / g.spacing[0];
    const double inv_hy = 1.0 / g.spacing[1];
    cv.x.resize(static_cast<std::size_t>(g.cell_count()));
    cv.y.resize(static_cast<std::size_t>(g.cell_count()));
    for (int ci = 0; ci < g.cells(0); ++ci) {
        for (int cj = 0; cj < g.cells(1); ++cj) {
            const int n00 = ci * ny + cj;
            const int n01 = n00 + 1;
            const int n10 = n00 + ny;
            const int n11 = n10 + 1;
            const int c = g.cell_index(ci, cj);
            // Each component averages the two parallel node-pair differences.
            cv.x[static_cast<std::size_t>(c)] =
                0.5 * ((u[n10] - u[n00]) + (u[n11] - u[n01])) * inv_hx;
            cv.y[static_cast<std::size_t>(c)] =
                0.5 * ((u[n01] - u[n00]) + (u[n11] - u[n10])) * inv_hy;
        }
    }
    return cv;
}

double integrate_nodes(const std::vector<double>& f, const Grid& g) {
    ensure(static_cast<int>(f.size()) == g.node_count(),
           "integrate_nodes: field/grid size mismatch");
    double s = 0.0;
    for (int n = 0; n < g.node_count(); ++n)
        s += g.node_weight(n) * f[static_cast<std::size_t>(n)];
    return s;
}

double integrate_nodes(const Field& f, const Grid& g) {
    return integrate_nodes(f.values, g);
}

double integrate_cells(const std::vector<double>& f, const Grid& g) {
    ensure(static_cast<int>(f.size()) == g.cell_count(),
           "integrate_cells: one value per cell required");
    double s = 0.0;
    for (double v : f) s += v;
    return s * g.cell_volume();
}

Field enforce_boundary(const Field& u, const Grid& g) {
    ensure(u.size() == g.node_count(), "enforce_boundary: size mismatch");
    Field out = u;
    if (g.bc == BoundaryMode::Neumann) return out;
    for (int n = 0; n < g.node_count(); ++n)
        if (g.is_boundary(n)) out[n] = 0.0;
    return out;
}

namespace {

std::string fmt_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void dump_field(const Field& u, const Grid& g, std::ostream& out) {
    ensure(u.size() == g.node_count(), "dump_field: size mismatch");
    out << "# grid dim=" << g.dim << " nodes=" << g.nodes[0];
    if (g.dim == 2) out << ',' << g.nodes[1];
    out << " extents=" << fmt_real(g.lo[0]) << ':' << fmt_real(g.hi[0]);
    if (g.dim == 2) out << ',' << fmt_real(g.lo[1]) << ':' << fmt_real(g.hi[1]);
    out << " bc=" << (g.bc == BoundaryMode::Dirichlet ? 'D' : 'N') << '\n';
    for (double v : u.values) out << fmt_real(v) << '\n';
}

FieldDump load_field(std::istream& in) {
    std::string header;
    ensure(static_cast<bool>(std::getline(in, header)), "load_field: empty stream");

    int dim = 0;
    std::array<int, 2> nodes{0, 1};
    std::array<double, 2> lo{0.0, 0.0}, hi{0.0, 0.0};
    char bc_char = 0;

    auto value_after = [&](const std::string& key) -> std::string {
        const auto pos = header.find(key);
        ensure(pos != std::string::npos, "load_field: missing '" + key + "' in header");
        auto end = header.find(' ', pos);
        if (end == std::string::npos) end = header.size();
        return header.substr(pos + key.size(), end - pos - key.size());
    };

    dim = std::stoi(value_after("dim="));
    ensure(dim == 1 || dim == 2, "load_field: bad dim");
    {
        std::istringstream ss(value_after("nodes="));
        char comma = 0;
        ss >> nodes[0];
        if (dim == 2) ss >> comma >> nodes[1];
    }
    {
        std::istringstream ss(value_after("extents="));
        char sep = 0;
        ss >> lo[0] >> sep >> hi[0];
        if (dim == 2) ss >> sep >> lo[1] >> sep >> hi[1];
    }
    bc_char = value_after("bc=").at(0);
    ensure(bc_char == 'D' || bc_char == 'N', "load_field: bad bc flag");

    FieldDump d;
    d.grid = build_grid(dim, lo, hi, nodes,
                        bc_char == 'D' ? BoundaryMode::Dirichlet : BoundaryMode::Neumann);
    d.field.values.reserve(static_cast<std::size_t>(d.grid.node_count()));
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        d.field.values.push_back(std::stod(line));
    }
    ensure(d.field.size() == d.grid.node_count(),
           "load_field: value count does not match grid header");
    return d;
}

}  // namespace plap
