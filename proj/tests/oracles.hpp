#pragma once

// Independent reference values used by the unit and acceptance tests.

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <numbers>

namespace oracle {

// m(s, w) = 2 w^2s int_0^inf (1 - cos t) t^(-1-2s) dt by direct quadrature:
// tanh-sinh on the first period (endpoint singularity), Gauss-Kronrod period by period
// up to T = 2 pi K, and the remaining pieces int_T^inf t^(-1-2s) dt exactly and
// int_T^inf cos t t^(-a) dt by its asymptotic series at a multiple of 2 pi.
inline double multiplier_quadrature(double s, double w)
{
    const double a = 1.0 + 2.0 * s;
    auto f = [a](double t) {
        if (t < 1e-6) return 0.5 * std::pow(t, 2.0 - a);
        const double h = std::sin(0.5 * t);
        return 2.0 * h * h * std::pow(t, -a);
    };
    const double period = 2.0 * std::numbers::pi;
    boost::math::quadrature::tanh_sinh<double> ts;
    double sum = ts.integrate(f, 0.0, period, 1e-14);
    const int periods = 2000;
    for (int k = 1; k < periods; ++k)
        sum += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
            f, k * period, (k + 1) * period, 10, 1e-14);
    const double T = periods * period;
    sum += std::pow(T, -2.0 * s) / (2.0 * s);
    // int_T^inf cos t t^-a dt = a T^(-a-1) - a(a+1)(a+2) T^(-a-3) + ...
    double term = a * std::pow(T, -a - 1.0);
    double cos_tail = 0.0;
    for (int j = 0; j < 4; ++j) {
        cos_tail += term;
        term *= -(a + 2.0 * j + 1.0) * (a + 2.0 * j + 2.0) / (T * T);
    }
    sum -= cos_tail;
    return 2.0 * std::pow(w, 2.0 * s) * sum;
}

// Closed form 2 w^2s Gamma(1-2s) cos(pi s) / (2s) of the same integral.
inline double multiplier_closed_form(double s, double w)
{
    return 2.0 * std::pow(w, 2.0 * s) * boost::math::tgamma(1.0 - 2.0 * s) *
           std::cos(std::numbers::pi * s) / (2.0 * s);
}

}  // namespace oracle
