#pragma once

#include <string>
#include <vector>

namespace pnlab {

enum class StressKind { zero, constant, smooth, tabulated };

/// External stress sigma(t, x) with a declared bound M on |sigma|, |sigma_x|, |sigma_t|.
///
///   zero
///   constant   sigma = A
///   smooth     sigma = A + B sin(k x - w t)
///   tabulated  sigma(x) piecewise linear through (x_j, sigma_j), held constant outside
class StressField {
public:
    static StressField zero();
    static StressField constant(double value);
    static StressField smooth(double a, double b, double k, double omega);
    static StressField tabulated(std::vector<double> x, std::vector<double> sigma);

    /// Parses "zero", "const:c", "smooth:A,B,k,w" or "table:path" (CSV x,sigma with a header).
    /// Throws ConfigError on malformed specs.
    static StressField parse(const std::string& spec);

    StressKind kind() const noexcept { return kind_; }
    std::string describe() const;

    double operator()(double t, double x) const;
    double dx(double t, double x) const;
    double dt(double t, double x) const;

    /// Bound M implied by the parameters (exact for the closed forms, sampled for tables).
    double lipschitz_bound() const noexcept { return bound_; }

    /// Samples |sigma|, |sigma_x|, |sigma_t| on [x0, x1] x [t0, t1] and throws ConfigError if
    /// any exceeds `bound` (the configured M).
    void check_bound(double bound, double x0, double x1, double t0, double t1) const;

    bool is_zero() const noexcept { return kind_ == StressKind::zero; }

private:
    StressKind kind_ = StressKind::zero;
    double a_ = 0.0, b_ = 0.0, k_ = 0.0, w_ = 0.0;
    std::vector<double> tx_, ts_;
    double bound_ = 0.0;
};

}  // namespace pnlab
