#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace pnlab {

/// Smallest n >= target whose prime factors are 2, 3, 5 or 7.
std::size_t smooth_fft_size(std::size_t target);

/// Symmetric Toeplitz matrix T_ij = t_|i-j| applied through a circulant embedding of
/// length >= 2n-1. Immutable, cheap to copy, and multiply() may be called concurrently.
class SymmetricToeplitz {
public:
    SymmetricToeplitz() = default;
    explicit SymmetricToeplitz(std::vector<double> column);

    std::size_t size() const noexcept { return column_.size(); }
    const std::vector<double>& column() const noexcept { return column_; }

    /// y = T x. x and y must have size() entries and may not alias.
    void multiply(std::span<const double> x, std::span<double> y) const;

    /// y = T x by the O(n^2) definition; used for small sizes and as a test oracle.
    void multiply_direct(std::span<const double> x, std::span<double> y) const;

private:
    struct Plan;
    std::vector<double> column_;
    std::shared_ptr<const Plan> plan_;
};

/// Inverse of (C + shift I) where C is the optimal (T. Chan) circulant approximation of a
/// symmetric Toeplitz matrix. Used as a preconditioner for operators of the form
/// Toeplitz + diagonal.
class CirculantInverse {
public:
    CirculantInverse() = default;
    CirculantInverse(const std::vector<double>& toeplitz_column, double shift);

    std::size_t size() const noexcept { return n_; }
    void apply(std::span<const double> x, std::span<double> y) const;

private:
    struct Plan;
    std::size_t n_ = 0;
    std::shared_ptr<const Plan> plan_;
};

}  // namespace pnlab
