#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "pnlab/corrector_solver.hpp"
#include "pnlab/error.hpp"

using namespace pnlab;

namespace {

struct Fixture {
    Potential p = Potential::builtin_cosine();
    LayerProfile layer;
    CorrectorProfile psi;
};

const Fixture& fixture()
{
    static const Fixture f = [] {
        Fixture f;
        LayerOptions o;
        o.half_width = 200.0;
        f.layer = solve_layer(f.p, 0.25, o);
        f.psi = solve_corrector(f.layer, f.p);
        return f;
    }();
    return f;
}

double max_abs(const std::vector<double>& v)
{
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace

TEST_CASE("right-hand side is compatible with the translation mode")
{
    // <u' + eta (W''(u) - beta), u'> vanishes on the line; on the window it is small.
    const auto& f = fixture();
    CHECK(std::abs(f.psi.solvability_defect) < 0.05);
}

TEST_CASE("corrector meets the residual target and the gauge")
{
    const auto& f = fixture();
    CHECK(f.psi.residual_norm <= 1e-6);
    CHECK(std::abs(f.psi.orthogonality_defect) <= 1e-8);
    CHECK(f.psi.psi.stitch_mismatch() < 1e-12);
    CHECK(f.psi.psi.tail.exponent == doctest::Approx(1.0));
}

TEST_CASE("corrector is even for the even potential")
{
    const auto& v = fixture().psi.psi.values;
    const std::size_t n = v.size();
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(v[i] - v[n - 1 - i]));
    CHECK(worst < 1e-6 * max_abs(v));
}

TEST_CASE("far field follows the local balance")
{
    // psi ~ -eta (W''(u) - beta) / beta at large |x|, to leading order.
    const auto& f = fixture();
    const auto& g = f.layer.u.grid;
    const auto i = static_cast<std::size_t>(std::llround((150.0 - g.x_min) / g.dx));
    const double balance = -f.layer.eta * (f.p.d2W(f.layer.u.values[i]) - f.p.beta()) / f.p.beta();
    CHECK(f.psi.psi.values[i] == doctest::Approx(balance).epsilon(0.3));
}

TEST_CASE("weak form holds against smooth bumps")
{
    const auto& f = fixture();
    const auto w = weak_form_residual(f.layer, f.psi, f.p, {-150.0, -20.0, -3.0, 0.0, 7.0, 60.0}, 3.0);
    CHECK(w.max_relative <= 1e-5);
    CHECK(w.relative.size() == 6);
    CHECK_THROWS_AS(weak_form_residual(f.layer, f.psi, f.p, {199.0}, 3.0), ArgumentError);
}

TEST_CASE("translation mode is a near kernel away from the window edges")
{
    const auto& f = fixture();
    CHECK(kernel_defect(f.layer, f.p, 0.9) <= 1e-4);
    CHECK(kernel_defect(f.layer, f.p, 0.5) <= kernel_defect(f.layer, f.p, 1.0));
    CHECK_THROWS_AS(kernel_defect(f.layer, f.p, 0.0), ArgumentError);
}

TEST_CASE("linearity: tighter tolerance moves psi by at most the tolerance scale")
{
    const auto& f = fixture();
    CorrectorOptions o;
    o.tol = 2e-6;
    const auto loose = solve_corrector(f.layer, f.p, o);
    double diff = 0.0;
    for (std::size_t i = 0; i < loose.psi.size(); ++i)
        diff = std::max(diff, std::abs(loose.psi.values[i] - f.psi.psi.values[i]));
    CHECK(diff <= 1e-3 * max_abs(f.psi.psi.values));
}

TEST_CASE("unconverged layer is rejected")
{
    auto layer = fixture().layer;
    layer.residual_norm = 1e-3;
    CHECK_THROWS_AS(solve_corrector(layer, fixture().p), ConfigError);
    CorrectorOptions o;
    o.tol = -1.0;
    CHECK_THROWS_AS(solve_corrector(fixture().layer, fixture().p, o), ConfigError);
}
