#include "pnlab/frac_operator.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/zeta.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "pnlab/error.hpp"

namespace pnlab {

namespace {

// Targets per call below which the O(N) direct rows beat one FFT matvec.
constexpr std::size_t direct_threshold = 32;
constexpr std::size_t basis_cache_size = 4;

}  // namespace

double exterior_power_integral(double d, double b, double p, double s)
{
    if (!(b > 0.0) || !(d + b > 0.0))
        throw ArgumentError("exterior_power_integral: need b > 0 and d + b > 0");
    // y = b e^u turns the algebraic tail into an exponentially decaying one.
    auto integrand = [=](double u) {
        const double e = std::exp(u);
        if (!std::isfinite(e)) return 0.0;
        return std::exp(-2.0 * s * u) * std::pow(d + b * e, -p);
    };
    double err = 0.0;
    const double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        integrand, 0.0, std::numeric_limits<double>::infinity(), 20, 1e-13, &err);
    return std::pow(b, -2.0 * s) * v;
}

FracOperator::FracOperator(Grid grid, double s) : grid_(grid), s_(s)
{
    if (!(s > 0.0 && s < 1.0))
        throw ArgumentError("FracOperator: s must lie in (0,1), got " + std::to_string(s));
    if (!(grid.dx > 0.0) || !std::isfinite(grid.dx))
        throw ArgumentError("FracOperator: dx must be positive and finite");
    if (grid.size < 5) throw ArgumentError("FracOperator: need at least 5 grid points");

    const std::size_t n = grid.size;
    const double scale = std::pow(grid.dx, -2.0 * s);

    w_.assign(n, 0.0);
    for (std::size_t k = 1; k < n; ++k)
        w_[k] = scale * std::pow(static_cast<double>(k), -1.0 - 2.0 * s);

    half_sum_.assign(n, 0.0);
    long double acc = 0.0L;
    for (std::size_t k = 1; k < n; ++k) {
        acc += w_[k];
        half_sum_[k] = static_cast<double>(acc - 0.5L * w_[k]);
    }

    // Stencil coefficients of -zeta(2s-1) f'' dx^(2-2s) - zeta(2s-3) f''''/12 dx^(4-2s).
    const double z1 = -boost::math::zeta(2.0 * s - 1.0);
    const double z3 = -boost::math::zeta(2.0 * s - 3.0);
    near_ = {scale * (-30.0 / 12.0 * z1 + 6.0 / 12.0 * z3),
             scale * (16.0 / 12.0 * z1 - 4.0 / 12.0 * z3),
             scale * (-1.0 / 12.0 * z1 + 1.0 / 12.0 * z3)};

    std::vector<double> column = w_;
    column[0] = near_[0];
    column[1] += near_[1];
    column[2] += near_[2];
    toeplitz_ = SymmetricToeplitz(std::move(column));

    diag_.assign(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const std::size_t nl = i;
        const std::size_t nr = n - 1 - i;
        const double yl = static_cast<double>(nl) * grid.dx;
        const double yr = static_cast<double>(nr) * grid.dx;
        const double kappa = (std::pow(yl, -2.0 * s) + std::pow(yr, -2.0 * s)) / (2.0 * s);
        diag_[i] = near_[0] - half_sum_[nl] - half_sum_[nr] - kappa;
    }

    // All off-diagonal grid weights are positive, so the Gershgorin radius of row i is
    // (A 1)_i - A_ii.
    std::vector<double> ones(n, 1.0), rowsum(n, 0.0);
    apply_linear(ones, rowsum);
    for (std::size_t i = 1; i + 1 < n; ++i)
        gershgorin_ = std::max(gershgorin_, std::abs(diag_[i]) + (rowsum[i] - diag_[i]));
}

void FracOperator::check_function(const GridFunction& f) const
{
    if (!(f.grid == grid_)) throw ArgumentError("FracOperator: grid function lives on another grid");
    f.validate(3);
    if (f.tail.kind == TailKind::layer_asymptotic) {
        if (!(f.tail.exponent > 0.0) || !std::isfinite(f.tail.exponent))
            throw ConfigError("FracOperator: layer-asymptotic tail needs a positive exponent");
        if (!(f.tail.center > grid_.x_min && f.tail.center < grid_.x_max()))
            throw ConfigError("FracOperator: tail center must lie inside the window");
    }
}

void FracOperator::check_range(IndexRange at) const
{
    if (at.begin < 1 || at.end > grid_.size - 1 || at.begin > at.end)
        throw ArgumentError("FracOperator: targets must be interior indices 1..N-2");
}

double FracOperator::weight(std::size_t i, std::size_t j) const
{
    const std::size_t n = grid_.size;
    double a = j == i ? diag_[i] : toeplitz_.column()[i > j ? i - j : j - i];
    if (j == 0) a -= 0.5 * w_[i];
    if (j == n - 1) a -= 0.5 * w_[n - 1 - i];
    return a;
}

void FracOperator::apply_linear(std::span<const double> f, std::span<double> y) const
{
    const std::size_t n = grid_.size;
    if (f.size() != n || y.size() != n) throw ArgumentError("FracOperator: size mismatch");
    toeplitz_.multiply(f, y);
    const double t0 = toeplitz_.column()[0];
    const double f0 = f[0];
    const double fn = f[n - 1];
    for (std::size_t i = 1; i + 1 < n; ++i)
        y[i] += (diag_[i] - t0) * f[i] - 0.5 * w_[i] * f0 - 0.5 * w_[n - 1 - i] * fn;
    y[0] = 0.0;
    y[n - 1] = 0.0;
}

double FracOperator::limit_tail_term(std::size_t i, const TailModel& tail) const
{
    if (tail.kind == TailKind::zero) return 0.0;
    const std::size_t n = grid_.size;
    const double yl = static_cast<double>(i) * grid_.dx;
    const double yr = static_cast<double>(n - 1 - i) * grid_.dx;
    double v = tail.left_limit * std::pow(yl, -2.0 * s_) / (2.0 * s_) +
               tail.right_limit * std::pow(yr, -2.0 * s_) / (2.0 * s_);
    if (i == 1) v += near_[2] * tail.left_limit;
    if (i == n - 2) v += near_[2] * tail.right_limit;
    return v;
}

std::shared_ptr<const FracOperator::TailBasis> FracOperator::build_basis(double exponent,
                                                                        double center) const
{
    const std::size_t n = grid_.size;
    auto b = std::make_shared<TailBasis>();
    b->exponent = exponent;
    b->center = center;
    b->coeff_left.assign(n, 0.0);
    b->coeff_right.assign(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double xi = grid_.x(static_cast<std::ptrdiff_t>(i));
        const double yl = static_cast<double>(i) * grid_.dx;
        const double yr = static_cast<double>(n - 1 - i) * grid_.dx;
        b->coeff_left[i] = exterior_power_integral(center - xi, yl, exponent, s_);
        b->coeff_right[i] = exterior_power_integral(xi - center, yr, exponent, s_);
    }
    const double xl = grid_.x(-1);
    const double xr = grid_.x(static_cast<std::ptrdiff_t>(n));
    b->coeff_left[1] += near_[2] * std::pow(std::abs(xl - center), -exponent);
    b->coeff_right[n - 2] += near_[2] * std::pow(std::abs(xr - center), -exponent);
    return b;
}

std::shared_ptr<const FracOperator::TailBasis> FracOperator::basis(double exponent,
                                                                  double center) const
{
    {
        std::lock_guard lock(cache_mutex_);
        for (const auto& b : cache_)
            if (b->exponent == exponent && b->center == center) return b;
    }
    auto b = build_basis(exponent, center);
    std::lock_guard lock(cache_mutex_);
    if (cache_.size() >= basis_cache_size) cache_.erase(cache_.begin());
    cache_.push_back(b);
    return b;
}

std::vector<double> FracOperator::tail_contribution(const TailModel& tail) const
{
    const std::size_t n = grid_.size;
    std::vector<double> out(n, 0.0);
    if (tail.kind == TailKind::zero) return out;
    for (std::size_t i = 1; i + 1 < n; ++i) out[i] = limit_tail_term(i, tail);
    if (tail.kind == TailKind::layer_asymptotic &&
        (tail.left_coefficient != 0.0 || tail.right_coefficient != 0.0)) {
        const auto b = basis(tail.exponent, tail.center);
        for (std::size_t i = 1; i + 1 < n; ++i)
            out[i] += tail.left_coefficient * b->coeff_left[i] +
                      tail.right_coefficient * b->coeff_right[i];
    }
    return out;
}

std::vector<double> FracOperator::apply(const GridFunction& f) const
{
    check_function(f);
    std::vector<double> y(grid_.size, 0.0);
    apply_linear(f.values, y);
    const auto t = tail_contribution(f.tail);
    for (std::size_t i = 1; i + 1 < grid_.size; ++i) y[i] += t[i];
    return y;
}

std::vector<double> FracOperator::apply(const GridFunction& f, IndexRange at) const
{
    check_range(at);
    if (at.size() <= direct_threshold) return apply_direct(f, at);
    const auto all = apply(f);
    return {all.begin() + static_cast<std::ptrdiff_t>(at.begin),
            all.begin() + static_cast<std::ptrdiff_t>(at.end)};
}

std::vector<double> FracOperator::apply_direct(const GridFunction& f, IndexRange at) const
{
    check_function(f);
    check_range(at);
    const std::size_t n = grid_.size;
    std::vector<double> out;
    out.reserve(at.size());
    for (std::size_t i = at.begin; i < at.end; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += weight(i, j) * f.values[j];
        acc += limit_tail_term(i, f.tail);
        if (f.tail.kind == TailKind::layer_asymptotic) {
            const double xi = grid_.x(static_cast<std::ptrdiff_t>(i));
            const double c = f.tail.center;
            const double p = f.tail.exponent;
            const double yl = static_cast<double>(i) * grid_.dx;
            const double yr = static_cast<double>(n - 1 - i) * grid_.dx;
            acc += f.tail.left_coefficient * exterior_power_integral(c - xi, yl, p, s_);
            acc += f.tail.right_coefficient * exterior_power_integral(xi - c, yr, p, s_);
            if (i == 1)
                acc += near_[2] * f.tail.left_coefficient *
                       std::pow(std::abs(grid_.x(-1) - c), -p);
            if (i == n - 2)
                acc += near_[2] * f.tail.right_coefficient *
                       std::pow(std::abs(grid_.x(static_cast<std::ptrdiff_t>(n)) - c), -p);
        }
        out.push_back(acc);
    }
    return out;
}

WeightRow FracOperator::row(std::size_t i, const TailModel& tail) const
{
    check_range({i, i + 1});
    const std::size_t n = grid_.size;
    WeightRow r;
    r.target = i;
    r.grid_weights.resize(n);
    for (std::size_t j = 0; j < n; ++j) r.grid_weights[j] = weight(i, j);
    TailModel unit_left = TailModel::constant(1.0, 0.0);
    TailModel unit_right = TailModel::constant(0.0, 1.0);
    r.left_limit_weight = limit_tail_term(i, unit_left);
    r.right_limit_weight = limit_tail_term(i, unit_right);
    if (tail.kind == TailKind::layer_asymptotic) {
        const double xi = grid_.x(static_cast<std::ptrdiff_t>(i));
        const double yl = static_cast<double>(i) * grid_.dx;
        const double yr = static_cast<double>(n - 1 - i) * grid_.dx;
        r.left_coefficient_weight =
            exterior_power_integral(tail.center - xi, yl, tail.exponent, s_);
        r.right_coefficient_weight =
            exterior_power_integral(xi - tail.center, yr, tail.exponent, s_);
        if (i == 1)
            r.left_coefficient_weight +=
                near_[2] * std::pow(std::abs(grid_.x(-1) - tail.center), -tail.exponent);
        if (i == n - 2)
            r.right_coefficient_weight +=
                near_[2] * std::pow(std::abs(grid_.x(static_cast<std::ptrdiff_t>(n)) -
                                             tail.center),
                                    -tail.exponent);
    }
    return r;
}

namespace {

double trapezoid_node_weight(std::size_t i, std::size_t n)
{
    return i == 0 || i == n - 1 ? 0.5 : 1.0;
}

}  // namespace

double FracOperator::quadratic_form(const GridFunction& f, const GridFunction& g) const
{
    if (!(f.grid == g.grid)) throw ArgumentError("quadratic_form: grids differ");
    check_function(f);
    check_function(g);
    const std::size_t n = grid_.size;
    std::vector<double> rho(n), rho_g(n), r(n), tg(n);
    for (std::size_t i = 0; i < n; ++i) {
        rho[i] = trapezoid_node_weight(i, n);
        rho_g[i] = rho[i] * g.values[i];
    }
    toeplitz_.multiply(rho, r);
    toeplitz_.multiply(rho_g, tg);
    long double acc = 0.0L;
    for (std::size_t i = 0; i < n; ++i)
        acc += rho[i] * f.values[i] * (g.values[i] * r[i] - tg[i]);
    return static_cast<double>(2.0L * grid_.dx * acc);
}

double FracOperator::quadratic_form_whole(const GridFunction& f, const GridFunction& g) const
{
    const std::size_t n = grid_.size;
    const double q = quadratic_form(f, g);
    for (std::size_t i : {std::size_t{0}, std::size_t{1}, n - 2, n - 1})
        if (g.values[i] != 0.0)
            throw ArgumentError("quadratic_form_whole: g must vanish on the two outer nodes");
    const auto t = tail_contribution(f.tail);
    long double acc = 0.0L;
    for (std::size_t i = 2; i + 2 < n; ++i) {
        const double yl = static_cast<double>(i) * grid_.dx;
        const double yr = static_cast<double>(n - 1 - i) * grid_.dx;
        const double kappa = (std::pow(yl, -2.0 * s_) + std::pow(yr, -2.0 * s_)) / (2.0 * s_);
        acc += g.values[i] * (t[i] - f.values[i] * kappa);
    }
    return q - static_cast<double>(2.0L * grid_.dx * acc);
}

double FracOperator::quadratic_form_direct(const GridFunction& f, const GridFunction& g) const
{
    if (!(f.grid == g.grid)) throw ArgumentError("quadratic_form: grids differ");
    check_function(f);
    check_function(g);
    const std::size_t n = grid_.size;
    const auto& t = toeplitz_.column();
    long double acc = 0.0L;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const double df = f.values[i] - f.values[j];
            const double dg = g.values[i] - g.values[j];
            acc += trapezoid_node_weight(i, n) * trapezoid_node_weight(j, n) *
                   t[i > j ? i - j : j - i] * df * dg;
        }
    return static_cast<double>(grid_.dx * acc);
}

}  // namespace pnlab
