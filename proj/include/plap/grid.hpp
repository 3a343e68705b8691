#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "plap/common.hpp"

namespace plap {

enum class BoundaryMode { Dirichlet, Neumann };

/// Uniform tensor grid on a 1-D interval or an axis-aligned 2-D rectangle.
///
/// Nodes are ordered lexicographically by axis index with the first axis
/// major: flat = i * nodes[1] + j in 2-D. This ordering is part of the file
/// format, so field dumps reproduce byte for byte.
struct Grid {
    int dim = 1;
    std::array<double, 2> lo{0.0, 0.0};
    std::array<double, 2> hi{1.0, 1.0};
    std::array<int, 2> nodes{0, 1};  // per-axis node count; nodes[1] == 1 in 1-D
    std::array<double, 2> spacing{0.0, 0.0};
    BoundaryMode bc = BoundaryMode::Dirichlet;

    int node_count() const { return nodes[0] * nodes[1]; }
    int cells(int axis) const { return nodes[axis] - 1; }
    int cell_count() const { return dim == 1 ? cells(0) : cells(0) * cells(1); }

    int index(int i, int j = 0) const { return dim == 1 ? i : i * nodes[1] + j; }
    int cell_index(int ci, int cj = 0) const {
        return dim == 1 ? ci : ci * cells(1) + cj;
    }
    double coord(int axis, int k) const { return lo[axis] + spacing[axis] * k; }

    bool is_boundary(int flat) const {
        const int i = dim == 1 ? flat : flat / nodes[1];
        if (i == 0 || i == nodes[0] - 1) return true;
        if (dim == 1) return false;
        const int j = flat % nodes[1];
        return j == 0 || j == nodes[1] - 1;
    }

    double volume() const {
        double v = hi[0] - lo[0];
        if (dim == 2) v *= hi[1] - lo[1];
        return v;
    }
    double cell_volume() const {
        return dim == 1 ? spacing[0] : spacing[0] * spacing[1];
    }

    /// Tensor-product trapezoid quadrature weight of a node.
    double node_weight(int flat) const;

    bool same_layout(const Grid& o) const;
};

/// One real value per grid node, lexicographic order.
struct Field {
    std::vector<double> values;

    int size() const { return static_cast<int>(values.size()); }
    double& operator[](int i) { return values[static_cast<std::size_t>(i)]; }
    double operator[](int i) const { return values[static_cast<std::size_t>(i)]; }
};

/// One real dim-vector per grid cell (interval in 1-D, 4-node rectangle in 2-D).
struct CellVectorField {
    int dim = 1;
    std::vector<double> x;  // d/dx per cell
    std::vector<double> y;  // d/dy per cell; empty in 1-D

    int size() const { return static_cast<int>(x.size()); }
    double magnitude(int c) const;
};

Grid build_grid(int dim, std::array<double, 2> lo, std::array<double, 2> hi,
                std::array<int, 2> nodes, BoundaryMode bc);

// Convenience builders used everywhere in tests and tools.
Grid grid_1d(double lo, double hi, int nodes, BoundaryMode bc);
Grid grid_2d(double lox, double hix, int nx, double loy, double hiy, int ny,
             BoundaryMode bc);

Field make_field(const Grid& g, double fill = 0.0);
Field make_field(const Grid& g, std::vector<double> values);

/// Cell-averaged forward differences. Exact for nodewise-linear fields.
CellVectorField gradient(const Field& u, const Grid& g);

/// Tensor-product trapezoid quadrature of nodal values.
double integrate_nodes(const Field& f, const Grid& g);
double integrate_nodes(const std::vector<double>& f, const Grid& g);

/// Sum of cell value times cell volume.
double integrate_cells(const std::vector<double>& f, const Grid& g);

/// Dirichlet: boundary nodes set to zero. Neumann: identity.
Field enforce_boundary(const Field& u, const Grid& g);

// --- field dump format ------------------------------------------------------
// Header line:
//   # grid dim=<d> nodes=<n1[,n2]> extents=<lo1:hi1[,lo2:hi2]> bc=<D|N>
// followed by one node value per line in lexicographic order.

void dump_field(const Field& u, const Grid& g, std::ostream& out);

struct FieldDump {
    Grid grid;
    Field field;
};
FieldDump load_field(std::istream& in);

}  // namespace plap
