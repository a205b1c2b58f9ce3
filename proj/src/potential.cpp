#include "pnlab/potential.hpp"

#include <cmath>
#include <numbers>

#include "pnlab/error.hpp"

namespace pnlab {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;
constexpr std::size_t positivity_samples = 100000;

}  // namespace

std::string to_string(PotentialKind kind)
{
    switch (kind) {
    case PotentialKind::builtin_cosine: return "builtin-cosine";
    case PotentialKind::user_cosine_series: return "user-polynomial-of-cosines";
    }
    return "unknown";
}

PotentialKind potential_kind_from_string(const std::string& name)
{
    if (name == "builtin-cosine") return PotentialKind::builtin_cosine;
    if (name == "user-polynomial-of-cosines" || name == "user-cosine-series")
        return PotentialKind::user_cosine_series;
    throw ConfigError("potential.kind: unknown kind '" + name +
                      "' (expected builtin-cosine or user-polynomial-of-cosines)");
}

Potential::Potential(PotentialKind kind, std::vector<double> coefficients)
    : kind_(kind), coefficients_(std::move(coefficients))
{
    for (std::size_t k = 0; k < coefficients_.size(); ++k) {
        const double a = coefficients_[k];
        if (!std::isfinite(a)) throw ConfigError("potential.coefficients: non-finite coefficient");
        const double freq = two_pi * static_cast<double>(k + 1);
        beta_ += a * freq * freq;
        max_curvature_ += std::abs(a) * freq * freq;
    }
}

Potential Potential::builtin_cosine()
{
    return Potential(PotentialKind::builtin_cosine, {1.0 / (two_pi * two_pi)});
}

Potential Potential::user_cosine_series(std::vector<double> coefficients)
{
    if (coefficients.empty()) throw ConfigError("potential.coefficients: empty cosine series");
    Potential p(PotentialKind::user_cosine_series, std::move(coefficients));
    if (!(p.beta_ > 0.0))
        throw ConfigError("potential.coefficients: W''(0) must be positive, got " +
                          std::to_string(p.beta_));
    // W > 0 away from the integers, checked on a dense sample of one period.
    for (std::size_t i = 1; i < positivity_samples; ++i) {
        const double x = static_cast<double>(i) / static_cast<double>(positivity_samples);
        if (!(p.W(x) > 0.0))
            throw ConfigError("potential.coefficients: W is not positive at v = " +
                              std::to_string(x));
    }
    return p;
}

Potential Potential::from_spec(PotentialKind kind, std::vector<double> coefficients)
{
    if (kind == PotentialKind::builtin_cosine) return builtin_cosine();
    return user_cosine_series(std::move(coefficients));
}

double Potential::eval(double x, int order) const
{
    if (order < 0 || order > 3)
        throw ArgumentError("Potential::eval: order must be 0..3, got " + std::to_string(order));
    // Reduce to [0,1) first so that W(x+1) and W(x) see the same argument.
    const double v = x - std::floor(x);
    double sum = 0.0;
    for (std::size_t k = 0; k < coefficients_.size(); ++k) {
        const double a = coefficients_[k];
        const double freq = two_pi * static_cast<double>(k + 1);
        const double arg = freq * v;
        switch (order) {
        case 0: {
            // 1 - cos(2 theta) = 2 sin^2(theta) keeps full relative accuracy near integers.
            const double h = std::sin(0.5 * arg);
            sum += a * 2.0 * h * h;
            break;
        }
        case 1: sum += a * freq * std::sin(arg); break;
        case 2: sum += a * freq * freq * std::cos(arg); break;
        default: sum -= a * freq * freq * freq * std::sin(arg); break;
        }
    }
    return sum;
}

double Potential::fourth_derivative_at_zero() const noexcept
{
    double sum = 0.0;
    for (std::size_t k = 0; k < coefficients_.size(); ++k) {
        const double freq = two_pi * static_cast<double>(k + 1);
        sum -= coefficients_[k] * freq * freq * freq * freq;
    }
    return sum;
}

}  // namespace pnlab
