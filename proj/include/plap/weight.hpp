#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "plap/grid.hpp"

namespace plap {

/// Compactly supported polynomial bump amplitude * max(0, 1-(|x-c|/r)^2)^2.
struct Bump {
    std::array<double, 2> center{0.0, 0.0};
    double radius = 0.0;
    double amplitude = 0.0;
};

/// Recipe for the indefinite weight a(x).
struct WeightSpec {
    enum class Kind { Tabulated, Bumps, PiecewiseIntervals };
    Kind kind = Kind::Tabulated;

    // Tabulated: one value per node, lexicographic order.
    std::vector<double> tabulated;

    // Bumps: constant background plus a sum of compact bumps.
    double background = 0.0;
    std::vector<Bump> bumps;

    // Piecewise constant on intervals (1-D only). Intervals are
    // [lo,b1), [b1,b2), ..., [bk,hi]; values has one more entry than
    // breakpoints.
    std::vector<double> breakpoints;
    std::vector<double> interval_values;
};

/// Nodal weight values plus the labeled connected components of the
/// discrete positive set {a > 0}. Labels run 1..n_components; 0 marks
/// nodes with a <= 0. Connectivity is adjacent-node in 1-D, 4-neighbor
/// in 2-D. Components are numbered in order of first appearance in
/// lexicographic node order.
struct WeightField {
    Field a;
    std::vector<int> labels;
    int n_components = 0;
    bool changes_sign = false;
};

WeightField evaluate_weight(const WeightSpec& spec, const Grid& g);

/// Wrap precomputed node values (also the tabulated-file path).
WeightField weight_from_values(std::vector<double> values, const Grid& g);

/// True iff the trapezoid integral of a is strictly negative.
bool neumann_admissible(const WeightField& w, const Grid& g);

/// Nodes whose component label lies outside `keep` (the nodes a restricted
/// solve pins to zero). Labels in `keep` must exist.
std::vector<std::uint8_t> component_mask(const WeightField& w,
                                         const std::vector<int>& keep);

/// Connected components of an arbitrary node mask (same connectivity and
/// numbering convention as the positive-set labels).
struct MaskLabels {
    std::vector<int> labels;  // 0 outside the mask, 1..count inside
    int count = 0;
};
MaskLabels label_mask(const std::vector<std::uint8_t>& mask, const Grid& g);

}  // namespace plap
