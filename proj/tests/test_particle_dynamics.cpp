#include <doctest.h>

#include <cmath>

#include "pnlab/error.hpp"
#include "pnlab/particle_dynamics.hpp"

using namespace pnlab;

namespace {

ParticleState make(std::vector<double> x, double s = 0.25, double gamma = 1.0, double delta = 0.0)
{
    ParticleState st;
    st.positions = std::move(x);
    st.s = s;
    st.gamma = gamma;
    st.delta = delta;
    return st;
}

}  // namespace

TEST_CASE("velocity examples")
{
    const auto z = StressField::zero();
    CHECK(velocity(make({3.0}), z)[0] == 0.0);

    const double a = 1.5, s = 0.25, g = 2.0;
    const auto v = velocity(make({-a, a}, s, g), z);
    const double expect = g / (2 * s * std::pow(2 * a, 2 * s));
    CHECK(v[0] == doctest::Approx(-expect));
    CHECK(v[1] == doctest::Approx(expect));

    const auto w = velocity(make({-2.0, 0.0, 2.0}, 0.1), z);
    CHECK(std::abs(w[1]) < 1e-15);
    CHECK(w[0] == doctest::Approx(-w[2]));

    CHECK(velocity(make({0.0}, 0.25, 3.0, 0.2), StressField::constant(0.1))[0] ==
          doctest::Approx(-3.0 * 0.3));
}

TEST_CASE("coincident or unsorted positions are rejected")
{
    const auto z = StressField::zero();
    CHECK_THROWS_AS(velocity(make({1.0, 1.0}), z), SingularityError);
    CHECK_THROWS_AS(velocity(make({2.0, 1.0}), z), SingularityError);
    CHECK_THROWS_AS(velocity(make({0.0}, 0.5), z), ConfigError);
    CHECK_THROWS_AS(integrate(make({0.0}), z, 0.0, {}), ArgumentError);
}

TEST_CASE("two-body gap follows the closed form")
{
    for (double s : {0.1, 0.25, 0.4}) {
        const double g0 = 1.0, gamma = 1.0;
        std::vector<double> times;
        for (int k = 0; k <= 20; ++k) times.push_back(5.0 * k);
        const auto tr = integrate(make({-0.5, 0.5}, s, gamma), StressField::zero(), 100.0, times);
        REQUIRE(tr.samples.size() == times.size());
        double worst = 0.0;
        for (const auto& p : tr.samples) {
            const double gap = p.positions[1] - p.positions[0];
            const double ref = two_body_gap(g0, s, gamma, p.time);
            worst = std::max(worst, std::abs(gap - ref) / ref);
        }
        CHECK(worst <= 1e-7);
    }
}

TEST_CASE("one particle under constant stress moves at -gamma c")
{
    const auto tr = integrate(make({1.0}, 0.25, 2.0), StressField::constant(0.3), 4.0, {4.0});
    CHECK(tr.samples[0].positions[0] == doctest::Approx(1.0 - 2.0 * 0.3 * 4.0).epsilon(1e-10));
}

TEST_CASE("shifted system starts at x0 - delta and drifts at -gamma delta")
{
    const double delta = 0.1, gamma = 5.0;
    const auto tr = integrate(make({2.0}, 0.25, gamma, delta), StressField::zero(), 3.0, {0.0, 3.0});
    CHECK(tr.samples[0].shifted);
    CHECK(tr.samples[0].positions[0] == doctest::Approx(2.0 - delta));
    CHECK(tr.samples[1].positions[0] == doctest::Approx(2.0 - delta - gamma * delta * 3.0));
}

TEST_CASE("reflection symmetry and ordering are preserved")
{
    const auto tr = integrate(make({-3.0, -1.0, 0.5, 4.0}, 0.25, 1.0), StressField::zero(), 10.0,
                              {2.0, 10.0});
    const auto mirror =
        integrate(make({-4.0, -0.5, 1.0, 3.0}, 0.25, 1.0), StressField::zero(), 10.0, {2.0, 10.0});
    for (std::size_t k = 0; k < 2; ++k) {
        const auto& x = tr.samples[k].positions;
        const auto& y = mirror.samples[k].positions;
        for (std::size_t i = 0; i < 4; ++i) CHECK(x[i] == doctest::Approx(-y[3 - i]).epsilon(1e-7));
        for (std::size_t i = 1; i < 4; ++i) CHECK(x[i] > x[i - 1]);
    }
    CHECK(tr.min_gap > 1.0);
}

TEST_CASE("larger delta moves every particle further left")
{
    const auto z = StressField::zero();
    const auto a = integrate(make({-1.0, 1.0}, 0.25, 1.0, 0.1), z, 2.0, {2.0});
    const auto b = integrate(make({-1.0, 1.0}, 0.25, 1.0, 0.2), z, 2.0, {2.0});
    for (std::size_t i = 0; i < 2; ++i)
        CHECK(b.samples[0].positions[i] < a.samples[0].positions[i]);
}

TEST_CASE("strong inward stress triggers the near-collision error")
{
    // sigma = +-50 on either side of 0 squeezes the pair; repulsion balances only at gap 1.6e-3.
    const auto squeeze = StressField::tabulated({-1e-4, 1e-4}, {-50.0, 50.0});
    IntegrateOptions o;
    o.min_gap = 1e-2;
    CHECK_THROWS_AS(integrate(make({-0.5, 0.5}, 0.25, 1.0), squeeze, 10.0, {10.0}, o),
                    SingularityError);
}
