#include "pnlab/krylov.hpp"

#include <cmath>
#include <algorithm>
#include <vector>

#include "pnlab/error.hpp"

namespace pnlab {

namespace {

double dot(std::span<const double> a, std::span<const double> b)
{
    long double acc = 0.0L;
    for (std::size_t i = 0; i < a.size(); ++i) acc += static_cast<long double>(a[i]) * b[i];
    return static_cast<double>(acc);
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

}  // namespace

KrylovResult pcg(const LinearMap& A, const LinearMap& M, std::span<const double> b,
                 std::span<double> x, double rtol, int max_iter)
{
    const std::size_t n = b.size();
    if (x.size() != n) throw ArgumentError("pcg: size mismatch");
    std::vector<double> r(n), z(n), p(n), q(n);
    A(x, q);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - q[i];
    const double bnorm = std::max(norm(b), 1e-300);
    KrylovResult res;
    res.residual = norm(r);
    if (res.residual <= rtol * bnorm) {
        res.converged = true;
        return res;
    }
    M(r, z);
    p = z;
    double rz = dot(r, z);
    for (int it = 1; it <= max_iter; ++it) {
        A(p, q);
        const double pq = dot(p, q);
        if (!(pq > 0.0)) throw SolverError("pcg: matrix is not positive definite");
        const double alpha = rz / pq;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        res.iterations = it;
        res.residual = norm(r);
        if (res.residual <= rtol * bnorm) {
            res.converged = true;
            return res;
        }
        M(r, z);
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    return res;
}

KrylovResult gmres(const LinearMap& A, const LinearMap& M, std::span<const double> b,
                   std::span<double> x, double rtol, int restart, int max_iter)
{
    const std::size_t n = b.size();
    if (x.size() != n || restart < 1) throw ArgumentError("gmres: bad arguments");
    const auto m = static_cast<std::size_t>(restart);
    const double bnorm = std::max(norm(b), 1e-300);

    std::vector<std::vector<double>> V(m + 1, std::vector<double>(n));
    std::vector<std::vector<double>> Z(m, std::vector<double>(n));
    std::vector<double> H((m + 1) * m), cs(m), sn(m), g(m + 1), w(n), y(m);
    auto h = [&](std::size_t i, std::size_t j) -> double& { return H[i * m + j]; };

    KrylovResult res;
    int total = 0;
    while (true) {
        A(x, w);
        for (std::size_t i = 0; i < n; ++i) V[0][i] = b[i] - w[i];
        double beta = norm(V[0]);
        res.residual = beta;
        if (beta <= rtol * bnorm) {
            res.converged = true;
            res.iterations = total;
            return res;
        }
        if (total >= max_iter) {
            res.iterations = total;
            return res;
        }
        for (auto& v : V[0]) v /= beta;
        std::fill(g.begin(), g.end(), 0.0);
        g[0] = beta;

        std::size_t k = 0;
        for (; k < m && total < max_iter; ++k) {
            ++total;
            M(V[k], Z[k]);
            A(Z[k], w);
            for (std::size_t i = 0; i <= k; ++i) {
                h(i, k) = dot(w, V[i]);
                for (std::size_t l = 0; l < n; ++l) w[l] -= h(i, k) * V[i][l];
            }
            h(k + 1, k) = norm(w);
            if (h(k + 1, k) > 0.0)
                for (std::size_t l = 0; l < n; ++l) V[k + 1][l] = w[l] / h(k + 1, k);
            for (std::size_t i = 0; i < k; ++i) {
                const double t = cs[i] * h(i, k) + sn[i] * h(i + 1, k);
                h(i + 1, k) = -sn[i] * h(i, k) + cs[i] * h(i + 1, k);
                h(i, k) = t;
            }
            const double r = std::hypot(h(k, k), h(k + 1, k));
            cs[k] = r > 0.0 ? h(k, k) / r : 1.0;
            sn[k] = r > 0.0 ? h(k + 1, k) / r : 0.0;
            h(k, k) = r;
            h(k + 1, k) = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] = cs[k] * g[k];
            if (std::abs(g[k + 1]) <= rtol * bnorm) {
                ++k;
                break;
            }
        }
        // Back substitution and update x += Z y.
        for (std::size_t i = k; i-- > 0;) {
            double acc = g[i];
            for (std::size_t j = i + 1; j < k; ++j) acc -= h(i, j) * y[j];
            y[i] = h(i, i) != 0.0 ? acc / h(i, i) : 0.0;
        }
        for (std::size_t j = 0; j < k; ++j)
            for (std::size_t l = 0; l < n; ++l) x[l] += y[j] * Z[j][l];
    }
}

}  // namespace pnlab
