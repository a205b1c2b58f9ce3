#include "pnlab/layer_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "pnlab/error.hpp"
#include "pnlab/frac_operator.hpp"
#include "pnlab/krylov.hpp"
#include "pnlab/toeplitz.hpp"

namespace pnlab {

namespace {

double sup_interior(const std::vector<double>& v)
{
    double m = 0.0;
    for (std::size_t i = 1; i + 1 < v.size(); ++i) m = std::max(m, std::abs(v[i]));
    return m;
}

// Layer problem on a fixed grid: residual, tail bookkeeping and the linear solves.
class LayerProblem {
public:
    LayerProblem(const Potential& p, double s, const LayerOptions& o)
        : pot_(p), s_(s), opt_(o), grid_(Grid::symmetric(o.half_width, o.dx)), op_(grid_, s),
          n_(grid_.size), center_index_((grid_.size - 1) / 2)
    {
        const double c0 = 1.0 / (2.0 * s * p.beta());
        tail_ = TailModel::layer(0.0, 1.0, c0, -c0, 2.0 * s, 0.0);
        u_.resize(n_);
        for (std::size_t i = 0; i < n_; ++i)
            u_[i] = 0.5 + std::atan(grid_.x(static_cast<std::ptrdiff_t>(i))) / std::numbers::pi;
        pin_edges();

        double mean_d = 0.0;
        const auto& t = op_.toeplitz_column();
        for (std::size_t i = 1; i + 1 < n_; ++i) mean_d += op_.diagonal()[i] - t[0];
        mean_diag_ = mean_d / static_cast<double>(n_ - 2);
    }

    const Grid& grid() const { return grid_; }
    const TailModel& tail() const { return tail_; }
    const std::vector<double>& values() const { return u_; }

    std::vector<double> residual() const
    {
        std::vector<double> f(n_, 0.0);
        op_.apply_linear(u_, f);
        const auto t = op_.tail_contribution(tail_);
        for (std::size_t i = 1; i + 1 < n_; ++i) f[i] += t[i] - pot_.dW(u_[i]);
        return f;
    }

    void pin_edges()
    {
        u_[0] = tail_.left(grid_.x_min);
        u_[n_ - 1] = tail_.right(grid_.x_max());
    }

    // Least-squares coefficients of the fixed-exponent tail on the outer part of the window.
    // Returns the relative change of the coefficients.
    double refit_tail()
    {
        const double p = tail_.exponent;
        const double edge = opt_.tail_fraction * (grid_.x_max() - grid_.x_min) / 2.0;
        long double nl = 0, dl = 0, nr = 0, dr = 0;
        for (std::size_t i = 0; i < n_; ++i) {
            const double x = grid_.x(static_cast<std::ptrdiff_t>(i));
            const double r = std::abs(x - tail_.center);
            const double b = std::pow(r, -p);
            if (x <= grid_.x_min + edge) {
                nl += u_[i] * b;
                dl += b * b;
            } else if (x >= grid_.x_max() - edge) {
                nr += (1.0 - u_[i]) * b;
                dr += b * b;
            }
        }
        const double cl = static_cast<double>(nl / dl);
        const double cr = static_cast<double>(nr / dr);
        const double change = std::max(std::abs(cl - tail_.left_coefficient) / std::abs(cl),
                                       std::abs(cr + tail_.right_coefficient) / std::abs(cr));
        tail_.left_coefficient = cl;
        tail_.right_coefficient = -cr;
        pin_edges();
        return change;
    }

    // Shift the profile so that u(0) = 1/2.
    void recenter()
    {
        GridFunction f(grid_, u_, tail_);
        std::size_t k = center_index_;
        while (k > 0 && u_[k] > 0.5) --k;
        while (k + 2 < n_ && u_[k + 1] < 0.5) ++k;
        double lo = grid_.x(static_cast<std::ptrdiff_t>(k));
        double hi = grid_.x(static_cast<std::ptrdiff_t>(k + 1));
        if (!(f.sample(lo) <= 0.5 && f.sample(hi) >= 0.5)) return;
        for (int it = 0; it < 100; ++it) {
            const double mid = 0.5 * (lo + hi);
            (f.sample(mid) < 0.5 ? lo : hi) = mid;
        }
        const double shift = 0.5 * (lo + hi);
        if (std::abs(shift) < 1e-14) return;
        for (std::size_t i = 1; i + 1 < n_; ++i)
            u_[i] = f.sample(grid_.x(static_cast<std::ptrdiff_t>(i)) + shift);
    }

    // One step of ((1 + tau k) I - tau A) u+ = u + tau (tail - W'(u) + k u).
    void relax(double tau)
    {
        const double kappa = pot_.max_curvature();
        std::vector<double> edges(n_, 0.0), ae(n_);
        edges[0] = u_[0];
        edges[n_ - 1] = u_[n_ - 1];
        op_.apply_linear(edges, ae);
        const auto t = op_.tail_contribution(tail_);
        std::vector<double> rhs(n_, 0.0);
        for (std::size_t i = 1; i + 1 < n_; ++i)
            rhs[i] = u_[i] + tau * (ae[i] + t[i] - pot_.dW(u_[i]) + kappa * u_[i]);

        std::vector<double> scratch(n_), ax(n_);
        LinearMap A = [&](std::span<const double> x, std::span<double> y) {
            std::copy(x.begin(), x.end(), scratch.begin());
            scratch[0] = scratch[n_ - 1] = 0.0;
            op_.apply_linear(scratch, ax);
            for (std::size_t i = 1; i + 1 < n_; ++i)
                y[i] = (1.0 + tau * kappa) * x[i] - tau * ax[i];
            y[0] = x[0];
            y[n_ - 1] = x[n_ - 1];
        };
        std::vector<double> col(op_.toeplitz_column());
        for (auto& c : col) c *= -tau;
        const CirculantInverse pre(col, 1.0 + tau * kappa - tau * mean_diag_);
        LinearMap M = [&](std::span<const double> x, std::span<double> y) {
            pre.apply(x, y);
            y[0] = x[0];
            y[n_ - 1] = x[n_ - 1];
        };
        std::vector<double> x(u_);
        x[0] = x[n_ - 1] = 0.0;
        const auto r = pcg(A, M, rhs, x, 1e-12, 500);
        if (!r.converged) throw ConvergenceError("layer relaxation: inner CG stalled", r.residual);
        for (std::size_t i = 1; i + 1 < n_; ++i) u_[i] = x[i];
    }

    // Newton step on the interior equations bordered by the gauge u(0) = 1/2 and the
    // translation mode u'. Returns the sup norm of the update.
    double newton(const std::vector<double>& f)
    {
        const std::size_t c = center_index_;
        std::vector<double> b(n_, 0.0), w2(n_);
        for (std::size_t i = 1; i + 1 < n_; ++i) {
            b[i] = (u_[i + 1] - u_[i - 1]) / (2.0 * grid_.dx);
            w2[i] = pot_.d2W(u_[i]);
        }
        double mean_w2 = 0.0;
        for (std::size_t i = 1; i + 1 < n_; ++i) mean_w2 += w2[i];
        mean_w2 /= static_cast<double>(n_ - 2);

        std::vector<double> scratch(n_), ax(n_);
        LinearMap J = [&](std::span<const double> x, std::span<double> y) {
            std::copy(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(n_), scratch.begin());
            scratch[0] = scratch[n_ - 1] = 0.0;
            op_.apply_linear(scratch, ax);
            const double lambda = x[n_];
            for (std::size_t i = 1; i + 1 < n_; ++i)
                y[i] = ax[i] - w2[i] * x[i] + lambda * b[i];
            y[0] = x[0];
            y[n_ - 1] = x[n_ - 1];
            y[n_] = x[c];
        };
        const CirculantInverse pre(op_.toeplitz_column(), mean_diag_ - mean_w2);
        std::vector<double> wb(n_);
        pre.apply(b, wb);
        wb[0] = wb[n_ - 1] = 0.0;
        LinearMap M = [&, wc = wb[c]](std::span<const double> r, std::span<double> z) {
            std::span<double> zz(z.data(), n_);
            pre.apply(r.first(n_), zz);
            const double lambda = (zz[c] - r[n_]) / wc;
            for (std::size_t i = 1; i + 1 < n_; ++i) zz[i] -= lambda * wb[i];
            zz[0] = r[0];
            zz[n_ - 1] = r[n_ - 1];
            z[n_] = lambda;
        };
        std::vector<double> rhs(n_ + 1, 0.0), x(n_ + 1, 0.0);
        for (std::size_t i = 1; i + 1 < n_; ++i) rhs[i] = -f[i];
        rhs[n_] = 0.5 - u_[c];
        const auto r = gmres(J, M, rhs, x, 1e-6, 60, 2000);
        if (!r.converged) throw ConvergenceError("layer Newton: GMRES stalled", r.residual);
        double step = 0.0;
        for (std::size_t i = 1; i + 1 < n_; ++i) {
            u_[i] += x[i];
            step = std::max(step, std::abs(x[i]));
        }
        return step;
    }

private:
    const Potential& pot_;
    double s_;
    LayerOptions opt_;
    Grid grid_;
    FracOperator op_;
    std::size_t n_;
    std::size_t center_index_;
    TailModel tail_;
    std::vector<double> u_;
    double mean_diag_ = 0.0;
};

}  // namespace

double theta_exponent(double s)
{
    if (!(s > 0.0 && s < 0.5))
        throw ArgumentError("theta_exponent: s must lie in (0,1/2), got " + std::to_string(s));
    const double a = 1.0 + 2.0 * s - std::max(1.0 - 8.0 * s, 0.0);
    return std::min(a, 8.0 * s) / 2.0;
}

GridFunction layer_derivative(const GridFunction& u, double s)
{
    (void)s;
    const std::size_t n = u.size();
    std::vector<double> d(n);
    const double h = u.grid.dx;
    for (std::size_t k = 0; k < n; ++k) {
        const auto i = static_cast<std::ptrdiff_t>(k);
        d[k] = (-u.node(i + 2) + 8.0 * u.node(i + 1) - 8.0 * u.node(i - 1) + u.node(i - 2)) /
               (12.0 * h);
    }
    TailModel t = TailModel::zero();
    if (u.tail.kind == TailKind::layer_asymptotic) {
        const double p = u.tail.exponent;
        t = TailModel::layer(0.0, 0.0, p * u.tail.left_coefficient, -p * u.tail.right_coefficient,
                             p + 1.0, u.tail.center);
    }
    return GridFunction(u.grid, std::move(d), t);
}

double derivative_energy(const GridFunction& du)
{
    const std::size_t n = du.size();
    long double acc = 0.0L;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = (i == 0 || i == n - 1) ? 0.5 : 1.0;
        acc += w * du.values[i] * du.values[i];
    }
    double e = static_cast<double>(acc) * du.grid.dx;
    if (du.tail.kind == TailKind::layer_asymptotic) {
        const double q = du.tail.exponent;
        const double rl = du.tail.center - du.grid.x_min;
        const double rr = du.grid.x_max() - du.tail.center;
        e += du.tail.left_coefficient * du.tail.left_coefficient * std::pow(rl, 1.0 - 2.0 * q) /
             (2.0 * q - 1.0);
        e += du.tail.right_coefficient * du.tail.right_coefficient * std::pow(rr, 1.0 - 2.0 * q) /
             (2.0 * q - 1.0);
    }
    return e;
}

LayerProfile solve_layer(const Potential& p, double s, const LayerOptions& o)
{
    if (!(s > 0.0 && s < 0.5))
        throw ConfigError("layer.s must lie in (0, 1/2), got " + std::to_string(s));
    if (!(o.dx > 0.0) || !(o.half_width > 20.0 * o.dx))
        throw ConfigError("layer: window must hold at least 40 cells");
    if (!(o.tol > 0.0)) throw ConfigError("layer.tol must be positive");

    LayerProblem prob(p, s, o);
    LayerProfile out;
    out.s = s;
    out.beta = p.beta();

    auto res = prob.residual();
    double rnorm = sup_interior(res);
    long steps = 0;
    while (rnorm > o.newton_switch) {
        if (steps >= o.max_steps)
            throw ConvergenceError("layer relaxation budget exhausted", rnorm);
        prob.relax(o.pseudo_dt);
        ++steps;
        if (steps % o.recenter_every == 0) {
            prob.recenter();
            prob.refit_tail();
        }
        res = prob.residual();
        rnorm = sup_interior(res);
        if (!std::isfinite(rnorm)) throw ConvergenceError("layer relaxation diverged", rnorm);
    }
    out.relaxation_steps = steps;

    int newton = 0;
    double change = 1.0;
    while (true) {
        if (rnorm <= 0.5 * o.tol && change <= 1e-9) break;
        if (newton >= o.max_newton) throw ConvergenceError("layer Newton budget exhausted", rnorm);
        prob.newton(res);
        ++newton;
        change = prob.refit_tail();
        res = prob.residual();
        rnorm = sup_interior(res);
        if (!std::isfinite(rnorm)) throw ConvergenceError("layer Newton diverged", rnorm);
    }
    out.newton_steps = newton;
    out.residual_norm = rnorm;

    out.u = GridFunction(prob.grid(), prob.values(), prob.tail());
    out.du = layer_derivative(out.u, s);
    for (double d : out.du.values)
        if (!(d > 0.0)) throw SolverError("layer lost monotonicity (u' <= 0 on the grid)");
    const double energy = derivative_energy(out.du);
    out.gamma = 1.0 / energy;
    out.eta = energy / out.beta;
    return out;
}

namespace {

struct LineFit {
    double slope;
    double intercept;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y)
{
    const auto n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return {slope, (sy - slope * sx) / n};
}

}  // namespace

DecayReport verify_decay(const LayerProfile& profile, double a, double b)
{
    const auto& u = profile.u;
    const double reach = std::min(-u.grid.x_min, u.grid.x_max());
    if (!(a >= 20.0)) throw ArgumentError("verify_decay: fit window must start at |x| >= 20");
    if (!(b <= reach)) throw ArgumentError("verify_decay: fit window leaves the grid");
    if (!(b >= 4.0 * a)) throw ArgumentError("verify_decay: fit window narrower than a factor 4");

    const double s = profile.s;
    const double c0 = 1.0 / (2.0 * s * profile.beta);
    DecayReport rep;
    rep.fit_min = a;
    rep.fit_max = b;
    rep.expected_coefficient = c0;
    rep.theta = theta_exponent(s);

    auto side = [&](bool right) {
        std::vector<double> lx, ly, lr, ld, fixed;
        for (std::size_t i = 0; i < u.size(); ++i) {
            const double x = u.grid.x(static_cast<std::ptrdiff_t>(i));
            const double ax = std::abs(x);
            if ((right ? x < 0 : x > 0) || ax < a || ax > b) continue;
            const double dev = right ? 1.0 - u.values[i] : u.values[i];
            const double corr = c0 * std::pow(ax, -2.0 * s) - dev;
            lx.push_back(std::log(ax));
            ly.push_back(std::log(dev));
            lr.push_back(std::log(std::abs(corr)));
            ld.push_back(std::log(profile.du.values[i]));
            fixed.push_back(std::log(dev) + 2.0 * s * std::log(ax));
        }
        if (lx.size() < 3) throw ArgumentError("verify_decay: too few grid points in the window");
        DecaySide d;
        const auto f = fit_line(lx, ly);
        d.slope = f.slope;
        d.prefactor = std::exp(f.intercept);
        double m = 0.0;
        for (double v : fixed) m += v;
        d.coefficient = std::exp(m / static_cast<double>(fixed.size()));
        d.corrected_slope = fit_line(lx, lr).slope;
        d.derivative_slope = fit_line(lx, ld).slope;
        return d;
    };
    rep.left = side(false);
    rep.right = side(true);

    for (std::size_t i = 1; i + 1 < u.size(); ++i) {
        const double x = u.grid.x(static_cast<std::ptrdiff_t>(i));
        const double ax = std::abs(x);
        if (ax < a || ax > b) continue;
        auto dev = [&](std::size_t k) {
            const double xk = u.grid.x(static_cast<std::ptrdiff_t>(k));
            return xk > 0 ? 1.0 - u.values[k] : u.values[k];
        };
        const double corr = x > 0 ? c0 * std::pow(ax, -2.0 * s) - dev(i)
                                  : dev(i) - c0 * std::pow(ax, -2.0 * s);
        const double xm = std::abs(u.grid.x(static_cast<std::ptrdiff_t>(i - 1)));
        const double xp = std::abs(u.grid.x(static_cast<std::ptrdiff_t>(i + 1)));
        const double slope =
            (std::log(dev(i + 1)) - std::log(dev(i - 1))) / (std::log(xp) - std::log(xm));
        rep.rows.push_back({x, dev(i), corr, slope});
    }
    return rep;
}

}  // namespace pnlab
