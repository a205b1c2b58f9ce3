#pragma once

#include <cstddef>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "pnlab/grid_function.hpp"
#include "pnlab/toeplitz.hpp"

namespace pnlab {

/// Half-open range [begin, end) of grid indices.
struct IndexRange {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::size_t size() const noexcept { return end - begin; }
};

/// Dense row of the discrete operator at one target, for diagnostics.
struct WeightRow {
    std::size_t target = 0;
    std::vector<double> grid_weights;   // coefficient of f_j, j = 0..N-1
    double left_limit_weight = 0.0;     // coefficient of the left tail limit
    double right_limit_weight = 0.0;
    double left_coefficient_weight = 0.0;   // coefficient of the left tail coefficient
    double right_coefficient_weight = 0.0;  // (layer-asymptotic tails only)
};

/// Discrete fractional Laplacian without normalisation constant,
///
///     L_s f(x) = 1/2 int (f(x+y) + f(x-y) - 2 f(x)) |y|^(-1-2s) dy,
///
/// on a fixed uniform grid. For a target x_i the integral over y > 0 is split at the
/// distance to each grid edge. Inside the window: trapezoid rule in y with weights
/// dx^-2s k^(-1-2s) (half weight on the edge node) plus the generalised Euler-Maclaurin
/// correction for the y^(1-2s), y^(3-2s) singularity at the origin,
///
///     - zeta(2s-1) f'' dx^(2-2s) - zeta(2s-3) f''''/12 dx^(4-2s),
///
/// with f'' and f'''' from five-point stencils. Outside the window the tail model is
/// integrated exactly (adaptive Gauss-Kronrod for power tails).
///
/// Only interior targets 1..N-2 are meaningful. The operator acting on grid values is
///     (A f)_i = sum_j t_|i-j| f_j + d_i f_i - w_i/2 f_0 - w_(N-1-i)/2 f_(N-1),
/// and the tail enters as an affine term. Everything here is immutable after construction
/// except for an internal, mutex-guarded cache of tail basis vectors.
class FracOperator {
public:
    FracOperator(Grid grid, double s);

    const Grid& grid() const noexcept { return grid_; }
    double s() const noexcept { return s_; }
    std::size_t size() const noexcept { return grid_.size; }

    /// L_s f at the requested targets (full operator: grid part plus tail integrals).
    std::vector<double> apply(const GridFunction& f, IndexRange at) const;
    /// L_s f at all interior targets; entries 0 and N-1 of the result are set to 0.
    std::vector<double> apply(const GridFunction& f) const;

    /// y = A f (grid part only), all rows; edge rows are left at 0.
    void apply_linear(std::span<const double> f, std::span<double> y) const;
    /// Tail contribution of a tail model at every interior target (edges 0).
    std::vector<double> tail_contribution(const TailModel& tail) const;

    /// Diagonal of A (edge entries are the interior formula's limit and unused).
    const std::vector<double>& diagonal() const noexcept { return diag_; }
    /// Toeplitz part t_k, k = 0..N-1.
    const std::vector<double>& toeplitz_column() const noexcept { return toeplitz_.column(); }
    /// Dense row of A at an interior target, including tail weights for `tail`.
    WeightRow row(std::size_t i, const TailModel& tail) const;

    /// O(N) per target evaluation of the same discrete operator; reference for tests.
    std::vector<double> apply_direct(const GridFunction& f, IndexRange at) const;

    /// Window-restricted energy pairing
    ///     int_W int_W (f(x)-f(y))(g(x)-g(y)) |x-y|^(-1-2s) dx dy
    /// discretised as the product trapezoid rule with the same near-diagonal corrections.
    double quadratic_form(const GridFunction& f, const GridFunction& g) const;
    /// Same pairing with the tails of f included (the pairing over the whole line),
    /// for g vanishing on the two outermost nodes at each edge and beyond the window.
    /// Equals -2 <g, L_s f> in the trapezoid inner product.
    double quadratic_form_whole(const GridFunction& f, const GridFunction& g) const;
    /// Direct O(N^2) double sum of quadratic_form(); reference for tests.
    double quadratic_form_direct(const GridFunction& f, const GridFunction& g) const;

    /// Bound on the spectrum of A: max_i (|d_i + t_0| + sum of off-diagonal row weights).
    double gershgorin_bound() const noexcept { return gershgorin_; }

private:
    struct TailBasis {
        double exponent;
        double center;
        std::vector<double> limit_left, limit_right;  // per unit limit
        std::vector<double> coeff_left, coeff_right;  // per unit coefficient
    };

    void check_function(const GridFunction& f) const;
    void check_range(IndexRange at) const;
    std::shared_ptr<const TailBasis> basis(double exponent, double center) const;
    std::shared_ptr<const TailBasis> build_basis(double exponent, double center) const;
    double weight(std::size_t i, std::size_t j) const;
    double limit_tail_term(std::size_t i, const TailModel& tail) const;

    Grid grid_;
    double s_;
    std::vector<double> w_;         // w_k = dx^-2s k^(-1-2s), w_0 = 0
    std::vector<double> half_sum_;  // S(n) = sum_{k<=n} w_k - w_n/2
    std::vector<double> near_;      // zeta stencil coefficients at offsets 0, 1, 2
    std::vector<double> diag_;
    SymmetricToeplitz toeplitz_;
    double gershgorin_ = 0.0;

    mutable std::mutex cache_mutex_;
    mutable std::vector<std::shared_ptr<const TailBasis>> cache_;
};

/// exp-substituted exterior integral int_b^inf (d + y)^-p y^(-1-2s) dy for d + b > 0.
double exterior_power_integral(double d, double b, double p, double s);

}  // namespace pnlab
