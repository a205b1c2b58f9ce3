#include "pnlab/grid_function.hpp"

#include <algorithm>
#include <cmath>

#include "pnlab/error.hpp"

namespace pnlab {

Grid Grid::symmetric(double half_width, double dx)
{
    if (!(dx > 0.0) || !(half_width > 0.0))
        throw ArgumentError("Grid::symmetric: half width and dx must be positive");
    const auto cells = static_cast<std::size_t>(std::llround(half_width / dx));
    if (cells < 1) throw ArgumentError("Grid::symmetric: window narrower than one cell");
    Grid g;
    g.dx = dx;
    g.size = 2 * cells + 1;
    g.x_min = -static_cast<double>(cells) * dx;
    return g;
}

std::string to_string(TailKind kind)
{
    switch (kind) {
    case TailKind::zero: return "zero";
    case TailKind::constant_limits: return "constant-limits";
    case TailKind::layer_asymptotic: return "layer-asymptotic";
    }
    return "unknown";
}

TailKind tail_kind_from_string(const std::string& name)
{
    if (name == "zero") return TailKind::zero;
    if (name == "constant-limits") return TailKind::constant_limits;
    if (name == "layer-asymptotic") return TailKind::layer_asymptotic;
    throw ParseError("unknown tail kind '" + name + "'");
}

TailModel TailModel::constant(double left, double right)
{
    TailModel t;
    t.kind = TailKind::constant_limits;
    t.left_limit = left;
    t.right_limit = right;
    return t;
}

TailModel TailModel::layer(double left, double right, double left_coefficient,
                           double right_coefficient, double exponent, double center)
{
    if (!(exponent > 0.0)) throw ConfigError("layer-asymptotic tail needs a positive exponent");
    TailModel t;
    t.kind = TailKind::layer_asymptotic;
    t.left_limit = left;
    t.right_limit = right;
    t.left_coefficient = left_coefficient;
    t.right_coefficient = right_coefficient;
    t.exponent = exponent;
    t.center = center;
    return t;
}

double TailModel::left(double x) const
{
    switch (kind) {
    case TailKind::zero: return 0.0;
    case TailKind::constant_limits: return left_limit;
    case TailKind::layer_asymptotic:
        return left_limit + left_coefficient * std::pow(std::abs(x - center), -exponent);
    }
    return 0.0;
}

double TailModel::right(double x) const
{
    switch (kind) {
    case TailKind::zero: return 0.0;
    case TailKind::constant_limits: return right_limit;
    case TailKind::layer_asymptotic:
        return right_limit + right_coefficient * std::pow(std::abs(x - center), -exponent);
    }
    return 0.0;
}

GridFunction::GridFunction(Grid g, std::vector<double> v, TailModel t)
    : grid(g), values(std::move(v)), tail(t)
{
    if (values.size() != grid.size)
        throw ArgumentError("GridFunction: value count does not match grid size");
}

double GridFunction::node(std::ptrdiff_t i) const
{
    if (i < 0) return tail.left(grid.x(i));
    if (i >= static_cast<std::ptrdiff_t>(values.size())) return tail.right(grid.x(i));
    return values[static_cast<std::size_t>(i)];
}

namespace {

// Lagrange weights on nodes -1, 0, 1, 2 at offset t in [0,1).
void cubic_weights(double t, double w[4])
{
    w[0] = -t * (t - 1.0) * (t - 2.0) / 6.0;
    w[1] = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
    w[2] = -(t + 1.0) * t * (t - 2.0) / 2.0;
    w[3] = (t + 1.0) * t * (t - 1.0) / 6.0;
}

void cubic_derivative_weights(double t, double w[4])
{
    w[0] = -(3.0 * t * t - 6.0 * t + 2.0) / 6.0;
    w[1] = (3.0 * t * t - 4.0 * t - 1.0) / 2.0;
    w[2] = -(3.0 * t * t - 2.0 * t - 2.0) / 2.0;
    w[3] = (3.0 * t * t - 1.0) / 6.0;
}

}  // namespace

double GridFunction::sample(double x) const
{
    if (x < grid.x_min) return tail.left(x);
    if (x > grid.x_max()) return tail.right(x);
    const double pos = (x - grid.x_min) / grid.dx;
    auto i = static_cast<std::ptrdiff_t>(std::floor(pos));
    i = std::min<std::ptrdiff_t>(i, static_cast<std::ptrdiff_t>(size()) - 2);
    const double t = pos - static_cast<double>(i);
    double w[4];
    cubic_weights(t, w);
    return w[0] * node(i - 1) + w[1] * node(i) + w[2] * node(i + 1) + w[3] * node(i + 2);
}

double GridFunction::sample_derivative(double x) const
{
    if (x < grid.x_min || x > grid.x_max()) {
        if (tail.kind != TailKind::layer_asymptotic) return 0.0;
        const double r = std::abs(x - tail.center);
        const double c = x < grid.x_min ? tail.left_coefficient : tail.right_coefficient;
        const double sign = x < tail.center ? -1.0 : 1.0;
        return -tail.exponent * c * std::pow(r, -tail.exponent - 1.0) * sign;
    }
    const double pos = (x - grid.x_min) / grid.dx;
    auto i = static_cast<std::ptrdiff_t>(std::floor(pos));
    i = std::min<std::ptrdiff_t>(i, static_cast<std::ptrdiff_t>(size()) - 2);
    const double t = pos - static_cast<double>(i);
    double w[4];
    cubic_derivative_weights(t, w);
    return (w[0] * node(i - 1) + w[1] * node(i) + w[2] * node(i + 1) + w[3] * node(i + 2)) /
           grid.dx;
}

double GridFunction::stitch_mismatch() const
{
    if (values.empty()) return 0.0;
    const double l = values.front();
    const double r = values.back();
    const double el = std::abs(tail.left(grid.x_min) - l) / std::max(std::abs(l), 1e-300);
    const double er = std::abs(tail.right(grid.x_max()) - r) / std::max(std::abs(r), 1e-300);
    return std::max(el, er);
}

void GridFunction::validate(std::size_t min_size) const
{
    if (!(grid.dx > 0.0) || !std::isfinite(grid.dx) || !std::isfinite(grid.x_min))
        throw ArgumentError("GridFunction: grid spacing must be positive and finite");
    if (values.size() != grid.size)
        throw ArgumentError("GridFunction: value count does not match grid size");
    if (values.size() < min_size)
        throw ArgumentError("GridFunction: need at least " + std::to_string(min_size) +
                            " grid points, got " + std::to_string(values.size()));
    for (double v : values)
        if (!std::isfinite(v)) throw NumericError("GridFunction: non-finite value");
}

}  // namespace pnlab
