#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace pnlab {

/// Uniform 1-D grid x_i = x_min + i dx, i = 0..size-1.
struct Grid {
    double x_min = 0.0;
    double dx = 1.0;
    std::size_t size = 0;

    double x(std::ptrdiff_t i) const noexcept { return x_min + static_cast<double>(i) * dx; }
    double x_max() const noexcept { return x(static_cast<std::ptrdiff_t>(size) - 1); }

    /// Grid on [-half_width, half_width] with a node at 0; dx is kept exact and the
    /// half width rounded to a whole number of cells.
    static Grid symmetric(double half_width, double dx);

    bool operator==(const Grid&) const = default;
};

enum class TailKind { zero, constant_limits, layer_asymptotic };

std::string to_string(TailKind kind);
TailKind tail_kind_from_string(const std::string& name);

/// Behaviour of a grid function beyond its window.
///
/// layer_asymptotic:  phi(x) = left_limit  + left_coefficient  |x - center|^-exponent  (x left of grid)
///                    phi(x) = right_limit + right_coefficient |x - center|^-exponent  (x right of grid)
/// A heteroclinic layer rising from 0 to 1 has left_coefficient = C > 0 and
/// right_coefficient = -C; its derivative has both coefficients positive.
struct TailModel {
    TailKind kind = TailKind::zero;
    double left_limit = 0.0;
    double right_limit = 0.0;
    double left_coefficient = 0.0;
    double right_coefficient = 0.0;
    double exponent = 1.0;
    double center = 0.0;

    static TailModel zero() { return {}; }
    static TailModel constant(double left, double right);
    static TailModel layer(double left, double right, double left_coefficient,
                           double right_coefficient, double exponent, double center = 0.0);

    double left(double x) const;
    double right(double x) const;

    bool operator==(const TailModel&) const = default;
};

/// Values on a uniform grid plus an analytic tail model.
struct GridFunction {
    Grid grid;
    std::vector<double> values;
    TailModel tail;

    GridFunction() = default;
    GridFunction(Grid g, std::vector<double> v, TailModel t = {});

    std::size_t size() const noexcept { return values.size(); }

    /// Value at any integer node index; indices outside the grid fall back to the tail.
    double node(std::ptrdiff_t i) const;

    /// Piecewise-cubic (4-point Lagrange) interpolant inside the window, tail outside.
    double sample(double x) const;
    /// Derivative of the same interpolant.
    double sample_derivative(double x) const;

    /// max over both edges of |tail(edge) - value(edge)| / max(|value(edge)|, 1e-300).
    double stitch_mismatch() const;

    /// Throws NumericError / ArgumentError on non-finite values, dx <= 0 or size mismatch.
    void validate(std::size_t min_size = 3) const;
};

}  // namespace pnlab
