#include "pnlab/toeplitz.hpp"

#include <fftw3.h>

#include <algorithm>
#include <complex>
#include <mutex>

#include "pnlab/error.hpp"

namespace pnlab {

namespace {

// The FFTW planner is not thread safe; execution with new-array functions is.
std::mutex& planner_mutex()
{
    static std::mutex m;
    return m;
}

struct RealBuffer {
    explicit RealBuffer(std::size_t n) : data(fftw_alloc_real(n)) {}
    ~RealBuffer() { fftw_free(data); }
    RealBuffer(const RealBuffer&) = delete;
    RealBuffer& operator=(const RealBuffer&) = delete;
    double* data;
};

struct ComplexBuffer {
    explicit ComplexBuffer(std::size_t n) : data(fftw_alloc_complex(n)) {}
    ~ComplexBuffer() { fftw_free(data); }
    ComplexBuffer(const ComplexBuffer&) = delete;
    ComplexBuffer& operator=(const ComplexBuffer&) = delete;
    fftw_complex* data;
};

// Forward/backward real transforms of one length. Plans are created on aligned scratch
// buffers with FFTW_ESTIMATE, so the chosen algorithm does not depend on timing.
struct RealFftPair {
    explicit RealFftPair(std::size_t n) : n(n)
    {
        RealBuffer r(n);
        ComplexBuffer c(n / 2 + 1);
        std::lock_guard lock(planner_mutex());
        forward = fftw_plan_dft_r2c_1d(static_cast<int>(n), r.data, c.data, FFTW_ESTIMATE);
        backward = fftw_plan_dft_c2r_1d(static_cast<int>(n), c.data, r.data, FFTW_ESTIMATE);
        if (!forward || !backward) throw SolverError("FFTW planning failed");
    }
    ~RealFftPair()
    {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(forward);
        fftw_destroy_plan(backward);
    }
    RealFftPair(const RealFftPair&) = delete;
    RealFftPair& operator=(const RealFftPair&) = delete;

    // y = real(IFFT(FFT(x) * eig)) / n for a symmetric circulant with real eigenvalues.
    void convolve(std::span<const double> x, std::span<double> y, const std::vector<double>& eig,
                  bool divide) const
    {
        RealBuffer r(n);
        ComplexBuffer c(n / 2 + 1);
        std::fill(r.data, r.data + n, 0.0);
        std::copy(x.begin(), x.end(), r.data);
        fftw_execute_dft_r2c(forward, r.data, c.data);
        for (std::size_t k = 0; k < n / 2 + 1; ++k) {
            const double f = divide ? 1.0 / eig[k] : eig[k];
            c.data[k][0] *= f;
            c.data[k][1] *= f;
        }
        fftw_execute_dft_c2r(backward, c.data, r.data);
        const double scale = 1.0 / static_cast<double>(n);
        for (std::size_t i = 0; i < y.size(); ++i) y[i] = r.data[i] * scale;
    }

    // Real eigenvalues of the symmetric circulant whose first column is c.
    std::vector<double> eigenvalues(const std::vector<double>& c) const
    {
        RealBuffer r(n);
        ComplexBuffer out(n / 2 + 1);
        std::copy(c.begin(), c.end(), r.data);
        fftw_execute_dft_r2c(forward, r.data, out.data);
        std::vector<double> eig(n / 2 + 1);
        for (std::size_t k = 0; k < eig.size(); ++k) eig[k] = out.data[k][0];
        return eig;
    }

    std::size_t n;
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;
};

}  // namespace

std::size_t smooth_fft_size(std::size_t target)
{
    for (std::size_t n = std::max<std::size_t>(target, 1);; ++n) {
        std::size_t m = n;
        for (std::size_t p : {2u, 3u, 5u, 7u})
            while (m % p == 0) m /= p;
        if (m == 1) return n;
    }
}

struct SymmetricToeplitz::Plan {
    explicit Plan(const std::vector<double>& column)
        : fft(smooth_fft_size(2 * column.size() - 1))
    {
        const std::size_t n = column.size();
        std::vector<double> c(fft.n, 0.0);
        c[0] = column[0];
        for (std::size_t k = 1; k < n; ++k) {
            c[k] = column[k];
            c[fft.n - k] = column[k];
        }
        eig = fft.eigenvalues(c);
    }
    RealFftPair fft;
    std::vector<double> eig;
};

SymmetricToeplitz::SymmetricToeplitz(std::vector<double> column) : column_(std::move(column))
{
    if (column_.empty()) throw ArgumentError("SymmetricToeplitz: empty column");
    plan_ = std::make_shared<const Plan>(column_);
}

void SymmetricToeplitz::multiply(std::span<const double> x, std::span<double> y) const
{
    if (x.size() != size() || y.size() != size())
        throw ArgumentError("SymmetricToeplitz::multiply: size mismatch");
    plan_->fft.convolve(x, y, plan_->eig, false);
}

void SymmetricToeplitz::multiply_direct(std::span<const double> x, std::span<double> y) const
{
    const std::size_t n = size();
    if (x.size() != n || y.size() != n)
        throw ArgumentError("SymmetricToeplitz::multiply_direct: size mismatch");
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += column_[i > j ? i - j : j - i] * x[j];
        y[i] = acc;
    }
}

struct CirculantInverse::Plan {
    Plan(const std::vector<double>& t, double shift) : fft(t.size())
    {
        const std::size_t n = t.size();
        std::vector<double> c(n);
        const auto nn = static_cast<double>(n);
        for (std::size_t k = 0; k < n; ++k) {
            const double tk = t[k];
            const double tnk = k == 0 ? 0.0 : t[n - k];
            c[k] = ((nn - static_cast<double>(k)) * tk + static_cast<double>(k) * tnk) / nn;
        }
        eig = fft.eigenvalues(c);
        for (double& e : eig) {
            e += shift;
            if (e == 0.0) throw SolverError("CirculantInverse: singular preconditioner");
        }
    }
    RealFftPair fft;
    std::vector<double> eig;
};

CirculantInverse::CirculantInverse(const std::vector<double>& toeplitz_column, double shift)
    : n_(toeplitz_column.size())
{
    if (n_ == 0) throw ArgumentError("CirculantInverse: empty column");
    plan_ = std::make_shared<const Plan>(toeplitz_column, shift);
}

void CirculantInverse::apply(std::span<const double> x, std::span<double> y) const
{
    if (x.size() != n_ || y.size() != n_)
        throw ArgumentError("CirculantInverse::apply: size mismatch");
    plan_->fft.convolve(x, y, plan_->eig, true);
}

}  // namespace pnlab
