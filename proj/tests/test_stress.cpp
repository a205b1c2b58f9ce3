#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "pnlab/error.hpp"
#include "pnlab/stress.hpp"

using namespace pnlab;

TEST_CASE("closed-form stress fields and their derivatives")
{
    const auto z = StressField::zero();
    CHECK(z.is_zero());
    CHECK(z(1.0, 2.0) == 0.0);
    CHECK(z.lipschitz_bound() == 0.0);

    const auto c = StressField::constant(0.3);
    CHECK(c(5.0, -7.0) == 0.3);
    CHECK(c.dx(0.0, 0.0) == 0.0);
    CHECK(c.dt(0.0, 0.0) == 0.0);
    CHECK(StressField::constant(0.0).is_zero());

    const auto s = StressField::smooth(0.1, 0.2, 3.0, 0.5);
    const double t = 0.7, x = -1.3, h = 1e-6;
    CHECK(s(t, x) == doctest::Approx(0.1 + 0.2 * std::sin(3.0 * x - 0.5 * t)));
    CHECK(s.dx(t, x) == doctest::Approx((s(t, x + h) - s(t, x - h)) / (2 * h)).epsilon(1e-7));
    CHECK(s.dt(t, x) == doctest::Approx((s(t + h, x) - s(t - h, x)) / (2 * h)).epsilon(1e-7));
    CHECK(s.lipschitz_bound() == doctest::Approx(0.6));
}

TEST_CASE("tabulated stress interpolates and holds its end values")
{
    const auto f = StressField::tabulated({0.0, 1.0, 3.0}, {0.0, 1.0, -1.0});
    CHECK(f(0.0, 0.5) == doctest::Approx(0.5));
    CHECK(f(0.0, 2.0) == doctest::Approx(0.0));
    CHECK(f(0.0, -4.0) == 0.0);
    CHECK(f(0.0, 9.0) == -1.0);
    CHECK(f.dx(0.0, 2.0) == doctest::Approx(-1.0));
    CHECK(f.dt(0.0, 2.0) == 0.0);
    CHECK(f.lipschitz_bound() == doctest::Approx(1.0));
    CHECK_THROWS_AS(StressField::tabulated({0.0, 0.0}, {1.0, 2.0}), ConfigError);
    CHECK_THROWS_AS(StressField::tabulated({0.0}, {1.0}), ConfigError);
}

TEST_CASE("stress specs parse and round-trip through describe")
{
    CHECK(StressField::parse("zero").is_zero());
    CHECK(StressField::parse("const:0.25")(0.0, 0.0) == 0.25);
    const auto s = StressField::parse("smooth:0.1,0.2,3,0.5");
    const auto again = StressField::parse(s.describe());
    CHECK(again(0.3, 0.4) == s(0.3, 0.4));
    CHECK_THROWS_AS(StressField::parse("const:abc"), ConfigError);
    CHECK_THROWS_AS(StressField::parse("smooth:1,2"), ConfigError);
    CHECK_THROWS_AS(StressField::parse("wave:1"), ConfigError);
    CHECK_THROWS_AS(StressField::parse("table:/nonexistent/stress.csv"), ConfigError);

    const char* path = "pnlab_test_stress_table.csv";
    {
        std::ofstream out(path);
        out << "x,sigma\n-1,0.5\n1,-0.5\n";
    }
    const auto t = StressField::parse(std::string("table:") + path);
    std::remove(path);
    CHECK(t(0.0, 0.0) == doctest::Approx(0.0));
}

TEST_CASE("bound check samples the field")
{
    const auto s = StressField::smooth(0.0, 0.5, 2.0, 0.0);
    CHECK_NOTHROW(s.check_bound(1.0, -5.0, 5.0, 0.0, 1.0));
    CHECK_THROWS_AS(s.check_bound(0.6, -5.0, 5.0, 0.0, 1.0), ConfigError);
}
