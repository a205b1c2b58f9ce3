#pragma once

#include <span>
#include <string>
#include <vector>

namespace pnlab {

enum class PotentialKind { builtin_cosine, user_cosine_series };

std::string to_string(PotentialKind kind);
PotentialKind potential_kind_from_string(const std::string& name);

/// 1-periodic misfit potential written as a finite cosine series
///
///     W(v) = sum_k a_k (1 - cos(2 pi k v)),   k = 1..K.
///
/// Every such W is even, vanishes on the integers and is symmetric about 1/2.
/// The builtin potential is a_1 = 1/(4 pi^2), which gives W''(0) = 1.
/// User coefficients are accepted only if W > 0 on a dense sample of (0,1)
/// and W''(0) > 0. Immutable after construction.
class Potential {
public:
    static Potential builtin_cosine();
    static Potential user_cosine_series(std::vector<double> coefficients);
    static Potential from_spec(PotentialKind kind, std::vector<double> coefficients);

    PotentialKind kind() const noexcept { return kind_; }
    const std::vector<double>& coefficients() const noexcept { return coefficients_; }

    /// W, W', W'' or W''' at x. Throws ArgumentError for order outside 0..3.
    double eval(double x, int order) const;

    double W(double x) const { return eval(x, 0); }
    double dW(double x) const { return eval(x, 1); }
    double d2W(double x) const { return eval(x, 2); }
    double d3W(double x) const { return eval(x, 3); }

    /// W''(0).
    double beta() const noexcept { return beta_; }
    /// Upper bound for |W''| (sum of |a_k| (2 pi k)^2).
    double max_curvature() const noexcept { return max_curvature_; }
    /// W''''(0); enters the far-field law of the corrector.
    double fourth_derivative_at_zero() const noexcept;

private:
    Potential(PotentialKind kind, std::vector<double> coefficients);

    PotentialKind kind_;
    std::vector<double> coefficients_;
    double beta_ = 0.0;
    double max_curvature_ = 0.0;
};

}  // namespace pnlab
