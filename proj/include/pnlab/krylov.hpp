#pragma once

#include <functional>
#include <span>

namespace pnlab {

/// y = Op(x); x and y never alias.
using LinearMap = std::function<void(std::span<const double>, std::span<double>)>;

struct KrylovResult {
    int iterations = 0;
    double residual = 0.0;  // final 2-norm of b - A x
    bool converged = false;
};

/// Preconditioned conjugate gradients for symmetric positive definite A with SPD
/// preconditioner M ~ A^-1. Stops when |r| <= rtol |b| or after max_iter iterations.
/// x holds the initial guess on entry.
KrylovResult pcg(const LinearMap& A, const LinearMap& M, std::span<const double> b,
                 std::span<double> x, double rtol, int max_iter);

/// Restarted GMRES(m) with right preconditioner M ~ A^-1 (modified Gram-Schmidt,
/// Givens rotations). Stops when |b - A x| <= rtol |b|.
KrylovResult gmres(const LinearMap& A, const LinearMap& M, std::span<const double> b,
                   std::span<double> x, double rtol, int restart, int max_iter);

}  // namespace pnlab
