#include "pnlab/corrector_solver.hpp"

#include <algorithm>
#include <cmath>

#include "pnlab/error.hpp"
#include "pnlab/frac_operator.hpp"
#include "pnlab/krylov.hpp"
#include "pnlab/toeplitz.hpp"

namespace pnlab {

namespace {

double grid_dot(const std::vector<double>& a, const std::vector<double>& b, double dx)
{
    const std::size_t n = a.size();
    long double acc = 0.0L;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = (i == 0 || i == n - 1) ? 0.5 : 1.0;
        acc += w * a[i] * b[i];
    }
    return static_cast<double>(acc) * dx;
}

double interior_l2(const std::vector<double>& r, double dx)
{
    long double acc = 0.0L;
    for (std::size_t i = 1; i + 1 < r.size(); ++i) acc += r[i] * r[i];
    return std::sqrt(static_cast<double>(acc) * dx);
}

}  // namespace

std::vector<double> corrector_rhs(const LayerProfile& layer, const Potential& p)
{
    const std::size_t n = layer.u.size();
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i)
        g[i] = layer.du.values[i] + layer.eta * (p.d2W(layer.u.values[i]) - p.beta());
    return g;
}

CorrectorProfile solve_corrector(const LayerProfile& layer, const Potential& p,
                                 const CorrectorOptions& o)
{
    if (!(layer.residual_norm <= 1e-5))
        throw ConfigError("corrector: layer residual " + std::to_string(layer.residual_norm) +
                          " above 1e-5; solve the layer first");
    if (!(o.tol > 0.0)) throw ConfigError("corrector.tol must be positive");

    const Grid& grid = layer.u.grid;
    const std::size_t n = grid.size;
    const double dx = grid.dx;
    const double s = layer.s;
    const double expo = 4.0 * s;
    FracOperator op(grid, s);

    const auto g = corrector_rhs(layer, p);
    const auto& du = layer.du.values;
    std::vector<double> w2(n);
    for (std::size_t i = 0; i < n; ++i) w2[i] = p.d2W(layer.u.values[i]);

    // Column of the tail coefficient a: pinned edge values plus the exterior integrals.
    const TailModel unit = TailModel::layer(0.0, 0.0, 1.0, 1.0, expo, 0.0);
    const double e0 = unit.left(grid.x_min);
    const double e1 = unit.right(grid.x_max());
    std::vector<double> col(n, 0.0), edges(n, 0.0);
    edges[0] = e0;
    edges[n - 1] = e1;
    op.apply_linear(edges, col);
    {
        const auto t = op.tail_contribution(unit);
        for (std::size_t i = 1; i + 1 < n; ++i) col[i] += t[i];
    }
    // Gauge row: trapezoid <psi, u'> with the pinned edge values.
    const double gauge_a = 0.5 * dx * (e0 * du[0] + e1 * du[n - 1]);

    std::vector<double> scratch(n), ax(n);
    LinearMap J = [&](std::span<const double> x, std::span<double> y) {
        std::copy(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(n), scratch.begin());
        scratch[0] = scratch[n - 1] = 0.0;
        op.apply_linear(scratch, ax);
        const double a = x[n];
        long double gauge = 0.0L;
        for (std::size_t i = 1; i + 1 < n; ++i) {
            y[i] = ax[i] - w2[i] * x[i] + a * col[i];
            gauge += x[i] * du[i];
        }
        y[0] = x[0];
        y[n - 1] = x[n - 1];
        y[n] = static_cast<double>(gauge) * dx + a * gauge_a;
    };

    double mean_d = 0.0, mean_w2 = 0.0;
    const auto& t = op.toeplitz_column();
    for (std::size_t i = 1; i + 1 < n; ++i) {
        mean_d += op.diagonal()[i] - t[0];
        mean_w2 += w2[i];
    }
    mean_d /= static_cast<double>(n - 2);
    mean_w2 /= static_cast<double>(n - 2);
    const CirculantInverse pre(t, mean_d - mean_w2);

    // Block preconditioner: circulant for the grid block, the gauge residual scaled onto a.
    // The translation mode and the border are left to GMRES (a handful of extra iterations).
    const double a_scale = 1.0 / std::max(std::abs(gauge_a), dx * std::abs(du[n / 2]));
    LinearMap M = [&](std::span<const double> r, std::span<double> z) {
        std::span<double> zz(z.data(), n);
        pre.apply(r.first(n), zz);
        zz[0] = r[0];
        zz[n - 1] = r[n - 1];
        z[n] = r[n] * a_scale;
    };

    std::vector<double> rhs(n + 1, 0.0), x(n + 1, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) rhs[i] = g[i];
    const double target = 0.1 * o.tol / std::sqrt(dx);
    double rnorm = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) rnorm += rhs[i] * rhs[i];
    rnorm = std::sqrt(rnorm);
    const auto kr = gmres(J, M, rhs, x, target / std::max(rnorm, 1e-300), o.restart, o.max_iter);

    CorrectorProfile out;
    out.s = s;
    out.eta = layer.eta;
    out.iterations = kr.iterations;
    const double a = x[n];
    std::vector<double> psi(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(n));
    psi[0] = a * e0;
    psi[n - 1] = a * e1;
    // Remove what GMRES leaves of the gauge along u' (a near-kernel direction, so the
    // equation residual barely moves; it is recomputed below).
    {
        const double c = grid_dot(psi, du, dx) / grid_dot(du, du, dx);
        for (std::size_t i = 1; i + 1 < n; ++i) psi[i] -= c * du[i];
    }
    out.psi = GridFunction(grid, psi, TailModel::layer(0.0, 0.0, a, a, expo, 0.0));

    // Residual of the equation as actually discretised.
    auto lpsi = op.apply(out.psi);
    std::vector<double> res(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) res[i] = lpsi[i] - w2[i] * psi[i] - g[i];
    out.residual_norm = interior_l2(res, dx);

    const double nu = std::sqrt(grid_dot(du, du, dx));
    out.solvability_defect = grid_dot(g, du, dx) / (std::sqrt(grid_dot(g, g, dx)) * nu);
    out.orthogonality_defect = grid_dot(psi, du, dx);

    if (!(out.residual_norm <= o.tol))
        throw ConvergenceError("corrector residual above tolerance", out.residual_norm);
    return out;
}

double kernel_defect(const LayerProfile& layer, const Potential& p, double core_fraction)
{
    if (!(core_fraction > 0.0 && core_fraction <= 1.0))
        throw ArgumentError("kernel_defect: core_fraction must lie in (0, 1]");
    const Grid& grid = layer.du.grid;
    FracOperator op(grid, layer.s);
    const auto l = op.apply(layer.du);
    const double center = 0.5 * (grid.x_min + grid.x_max());
    const double reach = core_fraction * 0.5 * (grid.x_max() - grid.x_min);
    std::vector<double> r(grid.size, 0.0);
    for (std::size_t i = 1; i + 1 < grid.size; ++i) {
        if (std::abs(grid.x(static_cast<std::ptrdiff_t>(i)) - center) > reach) continue;
        r[i] = l[i] - p.d2W(layer.u.values[i]) * layer.du.values[i];
    }
    return interior_l2(r, grid.dx) / interior_l2(layer.du.values, grid.dx);
}

WeakFormCheck weak_form_residual(const LayerProfile& layer, const CorrectorProfile& corrector,
                                 const Potential& p, const std::vector<double>& centers,
                                 double radius)
{
    const Grid& grid = layer.u.grid;
    const std::size_t n = grid.size;
    FracOperator op(grid, layer.s);
    const auto g = corrector_rhs(layer, p);
    WeakFormCheck out;
    for (double c : centers) {
        if (c - radius <= grid.x(2) || c + radius >= grid.x(static_cast<std::ptrdiff_t>(n) - 3))
            throw ArgumentError("weak_form_residual: test bump leaves the window");
        std::vector<double> phi(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double r = (grid.x(static_cast<std::ptrdiff_t>(i)) - c) / radius;
            if (std::abs(r) < 1.0) phi[i] = std::exp(1.0 - 1.0 / (1.0 - r * r));
        }
        const GridFunction test(grid, phi);
        const double q = 0.5 * op.quadratic_form_whole(corrector.psi, test);
        std::vector<double> wpsi(n);
        for (std::size_t i = 0; i < n; ++i)
            wpsi[i] = p.d2W(layer.u.values[i]) * corrector.psi.values[i];
        const double m = grid_dot(wpsi, phi, grid.dx);
        const double f = grid_dot(g, phi, grid.dx);
        const double rel = std::abs(q + m + f) / (std::abs(q) + std::abs(m) + std::abs(f));
        out.centers.push_back(c);
        out.relative.push_back(rel);
        out.max_relative = std::max(out.max_relative, rel);
    }
    return out;
}

}  // namespace pnlab
