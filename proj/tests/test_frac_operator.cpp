#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "pnlab/error.hpp"
#include "pnlab/frac_operator.hpp"

using namespace pnlab;

namespace {

GridFunction sample(const Grid& g, auto f, TailModel tail = {})
{
    std::vector<double> v(g.size);
    for (std::size_t i = 0; i < g.size; ++i) v[i] = f(g.x(static_cast<std::ptrdiff_t>(i)));
    return GridFunction(g, std::move(v), tail);
}

// Max relative error of L cos(wx) against -m cos(wx) over the central quarter of the window.
double spectral_error(double s, double w, int per_wavelength)
{
    const double dx = 2.0 * std::numbers::pi / (per_wavelength * w);
    const auto g = Grid::symmetric(64.0 * std::numbers::pi / w, dx);
    FracOperator op(g, s);
    const auto f = sample(g, [w](double x) { return std::cos(w * x); });
    const auto y = op.apply(f);
    const double m = oracle::multiplier_quadrature(s, w);
    double err = 0.0;
    for (std::size_t i = 3 * g.size / 8; i < 5 * g.size / 8; ++i) {
        const double x = g.x(static_cast<std::ptrdiff_t>(i));
        err = std::max(err, std::abs(y[i] + m * std::cos(w * x)) / m);
    }
    return err;
}

}  // namespace

TEST_CASE("multiplier oracle agrees with the Gamma closed form")
{
    for (double s : {0.1, 0.25, 0.4})
        for (double w : {0.5, 1.0, 2.0})
            CHECK(oracle::multiplier_quadrature(s, w) ==
                  doctest::Approx(oracle::multiplier_closed_form(s, w)).epsilon(1e-9));
}

TEST_CASE("constants are annihilated")
{
    const auto g = Grid::symmetric(20.0, 0.05);
    for (double s : {0.1, 0.25, 0.4}) {
        FracOperator op(g, s);
        const auto f = sample(g, [](double) { return 3.0; }, TailModel::constant(3.0, 3.0));
        const auto y = op.apply(f);
        for (std::size_t i = 1; i + 1 < g.size; ++i) CHECK(std::abs(y[i]) <= 1e-12 * 3.0 * 10.0);
        const auto yd = op.apply_direct(f, {1, 20});
        for (double v : yd) CHECK(std::abs(v) <= 1e-12 * 3.0 * 10.0);
    }
}

TEST_CASE("cosine eigenfunction at 64 points per wavelength")
{
    for (double s : {0.1, 0.25, 0.4})
        for (double w : {0.5, 1.0, 2.0}) {
            CAPTURE(s);
            CAPTURE(w);
            CHECK(spectral_error(s, w, 64) <= 1e-4);
        }
}

TEST_CASE("refinement order on the cosine")
{
    for (double s : {0.1, 0.25, 0.4}) {
        const double e1 = spectral_error(s, 1.0, 8);
        const double e2 = spectral_error(s, 1.0, 16);
        CAPTURE(s);
        CHECK(e1 / e2 >= 3.0);
    }
}

TEST_CASE("even input gives even output")
{
    const auto g = Grid::symmetric(30.0, 0.1);
    const double x0 = 0.0;
    FracOperator op(g, 0.3);
    const auto tail = TailModel::layer(0.0, 0.0, 0.7, 0.7, 0.6, x0);
    const auto f = sample(g, [&](double x) {
        const double r = std::abs(x - x0);
        return r < 30.0 ? 0.7 * std::pow(r * r + 1.0, -0.3) : 0.0;
    }, tail);
    const auto y = op.apply(f);
    for (std::size_t i = 1; i < g.size / 2; ++i)
        CHECK(std::abs(y[i] - y[g.size - 1 - i]) <= 1e-10 * std::max(1.0, std::abs(y[i])));
}

TEST_CASE("FFT path agrees with direct rows, layer tails included")
{
    const Grid g{-25.0, 0.05, 1001};
    FracOperator op(g, 0.25);
    const auto tail = TailModel::layer(0.0, 1.0, 1.0 / std::numbers::pi, -1.0 / std::numbers::pi,
                                       1.0, 0.3);
    const auto f = sample(g, [](double x) { return 0.5 + std::atan(x - 0.3) / std::numbers::pi; },
                          tail);
    const auto full = op.apply(f);
    for (IndexRange r : {IndexRange{1, 4}, IndexRange{498, 503}, IndexRange{996, 1000}}) {
        const auto direct = op.apply_direct(f, r);
        for (std::size_t k = 0; k < r.size(); ++k)
            CHECK(full[r.begin + k] == doctest::Approx(direct[k]).epsilon(1e-10));
    }
}

TEST_CASE("far-field value of a ramp matches wide brute-force quadrature")
{
    const double s = 0.25;
    auto F = [](double x) { return 0.5 + std::atan(x) / std::numbers::pi; };
    const auto g = Grid::symmetric(50.0, 0.05);
    FracOperator op(g, s);
    const auto tail = TailModel::layer(0.0, 1.0, 1.0 / std::numbers::pi,
                                       -1.0 / std::numbers::pi, 1.0, 0.0);
    const auto f = sample(g, F, tail);

    for (double x : {-40.0, 30.0, 40.0}) {
        const auto i = static_cast<std::size_t>(std::llround((x - g.x_min) / g.dx));
        const double got = op.apply(f, {i, i + 1})[0];

        // Brute force on a window ten times wider.
        auto h = [&](double y) {
            return y < 1e-8 ? 0.0 : (F(x + y) + F(x - y) - 2.0 * F(x)) * std::pow(y, -1.0 - 2.0 * s);
        };
        boost::math::quadrature::tanh_sinh<double> ts;
        double ref = ts.integrate(h, 0.0, 1.0, 1e-12);
        const double Y = 1000.0;
        for (double a = 1.0; a < Y; a *= 1.25)
            ref += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
                h, a, std::min(a * 1.25, Y), 15, 1e-12);
        ref += (1.0 - 2.0 * F(x)) * std::pow(Y, -2.0 * s) / (2.0 * s);
        CAPTURE(x);
        CHECK(got == doctest::Approx(ref).epsilon(1e-3));
    }
}

TEST_CASE("quadratic form")
{
    const Grid g{-5.0, 0.05, 201};
    FracOperator op(g, 0.25);
    const auto c = sample(g, [](double) { return 2.0; });
    CHECK(std::abs(op.quadratic_form(c, c)) <= 1e-10);

    auto bump = [](double x) { return std::exp(-4.0 * x * x); };
    const auto b = sample(g, bump);
    const auto b2 = sample(g, [](double x) { return x * std::exp(-2.0 * x * x) + 0.1; });
    const double q = op.quadratic_form(b, b);
    CHECK(q > 0.0);
    CHECK(q == doctest::Approx(op.quadratic_form_direct(b, b)).epsilon(1e-10));
    CHECK(op.quadratic_form(b, b2) ==
          doctest::Approx(op.quadratic_form_direct(b, b2)).epsilon(1e-10));
    CHECK(op.quadratic_form(b, b2) == doctest::Approx(op.quadratic_form(b2, b)).epsilon(1e-12));

    const Grid other{-5.0, 0.1, 101};
    CHECK_THROWS_AS(op.quadratic_form(b, sample(other, bump)), ArgumentError);
}

TEST_CASE("whole-line pairing equals -2 <g, L f>")
{
    const Grid g{-20.0, 0.05, 801};
    FracOperator op(g, 0.25);
    const auto tail = TailModel::layer(0.0, 1.0, 0.3, -0.3, 0.5, 0.0);
    const auto f = sample(g, [](double x) {
        return x < 0 ? 0.3 * std::pow(x * x + 1.0, -0.25) : 1.0 - 0.3 * std::pow(x * x + 1.0, -0.25);
    }, tail);
    const auto phi = sample(g, [](double x) { return std::exp(-(x - 1.0) * (x - 1.0)); });
    auto phi_c = phi;
    for (std::size_t i = 0; i < g.size; ++i)
        if (std::abs(g.x(static_cast<std::ptrdiff_t>(i)) - 1.0) > 8.0) phi_c.values[i] = 0.0;
    const auto lf = op.apply(f);
    double inner = 0.0;
    for (std::size_t i = 0; i < g.size; ++i) inner += phi_c.values[i] * lf[i] * g.dx;
    CHECK(op.quadratic_form_whole(f, phi_c) == doctest::Approx(-2.0 * inner).epsilon(1e-10));
    CHECK_THROWS_AS(op.quadratic_form_whole(f, sample(g, [](double) { return 1.0; })),
                    ArgumentError);
}

TEST_CASE("error surface")
{
    const Grid g{0.0, 0.1, 50};
    FracOperator op(g, 0.25);
    auto f = sample(g, [](double x) { return x; });
    CHECK_THROWS_AS(op.apply(f, {0, 3}), ArgumentError);
    CHECK_THROWS_AS(op.apply(f, {3, 50}), ArgumentError);
    f.values[7] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(op.apply(f), NumericError);
    auto h = sample(g, [](double x) { return x; }, TailModel::layer(0, 1, 1, -1, 0.5, 100.0));
    CHECK_THROWS_AS(op.apply(h), ConfigError);
    CHECK_THROWS_AS(FracOperator(g, 1.0), ArgumentError);
    CHECK_THROWS_AS(FracOperator(Grid{0.0, 0.1, 4}, 0.25), ArgumentError);
}

TEST_CASE("weight row reproduces the operator")
{
    const Grid g{-10.0, 0.1, 201};
    FracOperator op(g, 0.2);
    const auto tail = TailModel::layer(0.0, 1.0, 0.5, -0.5, 0.4, 0.0);
    const auto f = sample(g, [](double x) { return 0.5 + 0.5 * std::tanh(x); }, tail);
    const auto y = op.apply(f);
    for (std::size_t i : {1u, 50u, 199u}) {
        const auto r = op.row(i, tail);
        double acc = r.right_limit_weight + 0.5 * r.left_coefficient_weight -
                     0.5 * r.right_coefficient_weight;
        for (std::size_t j = 0; j < g.size; ++j) acc += r.grid_weights[j] * f.values[j];
        CHECK(acc == doctest::Approx(y[i]).epsilon(1e-10));
        for (std::size_t j = 0; j < g.size; ++j)
            if (j != i) CHECK(r.grid_weights[j] > 0.0);
    }
}

TEST_CASE("exact arctan layer at s = 1/2")
{
    // u = 1/2 + atan(x/pi)/pi solves L u = W'(u) for the builtin potential when s = 1/2;
    // its tails are 1/|x| with unit coefficient.
    const auto g = Grid::symmetric(200.0, 0.05);
    FracOperator op(g, 0.5);
    const double pi = std::numbers::pi;
    const auto f = sample(g, [pi](double x) { return 0.5 + std::atan(x / pi) / pi; },
                          TailModel::layer(0.0, 1.0, 1.0, -1.0, 1.0, 0.0));
    const auto y = op.apply(f);
    for (std::size_t i = 1; i + 1 < g.size; ++i) {
        const double x = g.x(static_cast<std::ptrdiff_t>(i));
        const double rhs = std::sin(2.0 * pi * f.values[i]) / (2.0 * pi);
        CHECK(std::abs(y[i] - rhs) <= (std::abs(x) < 100.0 ? 1e-8 : 1e-4));
    }
}
