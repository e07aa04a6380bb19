#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <vector>

#include <fftw3.h>

#include "fracmg/assembly.hpp"
#include "fracmg/errors.hpp"
#include "fracmg/mesh.hpp"

namespace fracmg {

/// Pad a coefficient vector with n_k - 1 zeros between mesh rows, producing
/// the vector the flattened Toeplitz matrix acts on.
inline std::vector<double> embed(const std::vector<double>& U, const MeshLevel& level) {
    const int n = level.nk, l = level.lk;
    if (std::int64_t(U.size()) != level.dofs())
        throw usage_error("embed: coefficient vector length mismatch");
    std::vector<double> out(std::size_t(GeneratorVector::length(n, l)), 0.0);
    for (int j = 0; j < l; ++j) {
        for (int r = 0; r < n; ++r)
            out[std::size_t(j) * std::size_t(2 * n - 1) + std::size_t(r)] =
                U[std::size_t(j) * std::size_t(n) + std::size_t(r)];
    }
    return out;
}

/// Inverse of embed on the retained index set.
inline std::vector<double> restrict_padded(const std::vector<double>& Up, const MeshLevel& level) {
    const int n = level.nk, l = level.lk;
    if (std::int64_t(Up.size()) != GeneratorVector::length(n, l))
        throw usage_error("restrict_padded: padded vector length mismatch");
    std::vector<double> out(std::size_t(level.dofs()));
    for (int j = 0; j < l; ++j) {
        for (int r = 0; r < n; ++r)
            out[std::size_t(j) * std::size_t(n) + std::size_t(r)] =
                Up[std::size_t(j) * std::size_t(2 * n - 1) + std::size_t(r)];
    }
    return out;
}

/// O(N log N) application of the block-Toeplitz-Toeplitz-block stiffness
/// matrix via circulant embedding and FFT. Two equivalent embeddings are
/// used, chosen by size:
///
/// - a 1-D embedding of the flattened Toeplitz matrix into a circulant of
///   power-of-two length L >= 2m-1, which also serves the plain matvec on
///   padded vectors;
/// - a 2-D block-circulant embedding into an (ny, nx) grid with
///   nx >= 2 n_k - 1 and ny >= 2 l_k - 1, which has a smaller transform and
///   wins once the 1-D length crosses the last-level-cache boundary.
///
/// In both cases the embedded kernel is even, so its transform is purely
/// real; the imaginary rounding noise is dropped and the spectral multiply
/// touches a real vector of half the size. Transforms reuse preallocated
/// scratch buffers, so applications through the same instance must not run
/// concurrently.
class ToeplitzOperator {
  public:
    explicit ToeplitzOperator(GeneratorVector gen) : gen_(std::move(gen)) {
        m_ = std::int64_t(gen_.values.size());
        if (m_ == 0) throw usage_error("ToeplitzOperator: empty generator");
        L_ = 1;
        while (L_ < 2 * m_ - 1) L_ <<= 1;
        use2d_ = L_ >= (std::int64_t(1) << 20);
        if (use2d_)
            p2_ = std::make_unique<Path2D>(gen_);
        else
            p1_ = std::make_unique<Path1D>(gen_, L_);
    }

    ToeplitzOperator(const ToeplitzOperator&) = delete;
    ToeplitzOperator& operator=(const ToeplitzOperator&) = delete;

    std::int64_t size() const { return m_; }
    const GeneratorVector& generator() const { return gen_; }

    /// Application of the flattened symmetric Toeplitz matrix to a padded
    /// vector of generator length.
    std::vector<double> matvec(const std::vector<double>& x) const {
        if (std::int64_t(x.size()) != m_) throw usage_error("toeplitz_matvec: length mismatch");
        if (!p1_) p1_ = std::make_unique<Path1D>(gen_, L_);
        double* in = p1_->buf->real();
        std::copy(x.begin(), x.end(), in);
        std::fill(in + m_, in + L_, 0.0);
        p1_->convolve();
        return std::vector<double>(in, in + m_);
    }

    /// Application to a mesh coefficient vector of gen.nk * gen.lk values:
    /// rows are embedded with zero padding directly into the FFT buffer and
    /// the retained rows extracted from the result, avoiding the two extra
    /// full-length passes of a separate embed/restrict pair.
    std::vector<double> apply_mesh(const std::vector<double>& U) const {
        const std::int64_t n = gen_.nk, l = gen_.lk;
        if (std::int64_t(U.size()) != n * l)
            throw usage_error("toeplitz apply_mesh: coefficient vector length mismatch");
        if (use2d_) return p2_->apply(U);
        double* in = p1_->buf->real();
        std::fill(in, in + L_, 0.0);
        for (std::int64_t j = 0; j < l; ++j)
            std::copy(U.begin() + j * n, U.begin() + (j + 1) * n, in + j * (2 * n - 1));
        p1_->convolve();
        std::vector<double> out(U.size());
        for (std::int64_t j = 0; j < l; ++j)
            std::copy(in + j * (2 * n - 1), in + j * (2 * n - 1) + n, out.begin() + j * n);
        return out;
    }

  private:
    struct Buffer {
        explicit Buffer(std::int64_t n)
            : p(static_cast<double*>(fftw_malloc(std::size_t(n) * sizeof(double)))) {}
        ~Buffer() { fftw_free(p); }
        Buffer(const Buffer&) = delete;
        double* real() const { return p; }
        fftw_complex* cplx() const { return reinterpret_cast<fftw_complex*>(p); }
        double* p;
    };

    // measured plans noticeably beat estimated ones for the memory-bound
    // sizes and their planning cost is paid once per size per process

    struct Path1D {
        std::int64_t L, nspec;
        // in-place transforms keep the working set at one buffer, which wins
        // while it fits in cache; at the largest sizes FFTW's out-of-place
        // algorithms are faster
        bool inplace;
        std::vector<double> lambda;
        std::unique_ptr<Buffer> buf, cbuf;
        fftw_plan fwd{}, bwd{};

        Path1D(const GeneratorVector& gen, std::int64_t L_in)
            : L(L_in), nspec(L_in / 2 + 1), inplace(L_in < (std::int64_t(1) << 20)) {
            buf = std::make_unique<Buffer>(2 * nspec);
            if (!inplace) cbuf = std::make_unique<Buffer>(2 * nspec);
            fftw_complex* spec = inplace ? buf->cplx() : cbuf->cplx();
            const unsigned flags = L >= (1 << 16) ? FFTW_MEASURE : FFTW_ESTIMATE;
            fwd = fftw_plan_dft_r2c_1d(int(L), buf->real(), spec, flags);
            bwd = fftw_plan_dft_c2r_1d(int(L), spec, buf->real(), flags);

            // first column of the circulant embedding
            const std::int64_t m = std::int64_t(gen.values.size());
            double* in = buf->real();
            std::fill(in, in + L, 0.0);
            in[0] = gen.values[0];
            for (std::int64_t i = 1; i < m; ++i) {
                in[i] = gen.values[std::size_t(i)];
                in[L - i] = gen.values[std::size_t(i)];
            }
            fftw_execute_dft_r2c(fwd, in, spec);
            lambda.resize(std::size_t(nspec));
            for (std::int64_t i = 0; i < nspec; ++i) lambda[std::size_t(i)] = spec[i][0];
        }

        ~Path1D() {
            fftw_destroy_plan(fwd);
            fftw_destroy_plan(bwd);
        }

        void convolve() const {
            double* in = buf->real();
            fftw_complex* spec = inplace ? buf->cplx() : cbuf->cplx();
            fftw_execute_dft_r2c(fwd, in, spec);
            const double scale = 1.0 / double(L);
            for (std::int64_t i = 0; i < nspec; ++i) {
                const double s = lambda[std::size_t(i)] * scale;
                spec[i][0] *= s;
                spec[i][1] *= s;
            }
            fftw_execute_dft_c2r(bwd, spec, in);
        }
    };

    struct Path2D {
        std::int64_t n, l, nx, ny, ncx;
        std::vector<double> lambda;
        std::unique_ptr<Buffer> buf, cbuf;
        fftw_plan fwd{}, bwd{};

        explicit Path2D(const GeneratorVector& gen) : n(gen.nk), l(gen.lk) {
            nx = 1;
            while (nx < 2 * n - 1) nx <<= 1;
            ny = 1;
            while (ny < 2 * l - 1) ny <<= 1;
            ncx = nx / 2 + 1;
            buf = std::make_unique<Buffer>(ny * nx);
            cbuf = std::make_unique<Buffer>(2 * ny * ncx);
            const unsigned flags = ny * nx >= (1 << 14) ? FFTW_MEASURE : FFTW_ESTIMATE;
            fwd = fftw_plan_dft_r2c_2d(int(ny), int(nx), buf->real(), cbuf->cplx(), flags);
            bwd = fftw_plan_dft_c2r_2d(int(ny), int(nx), cbuf->cplx(), buf->real(), flags);

            // wrapped kernel of the block-circulant embedding; nx >= 2n-1 and
            // ny >= 2l-1 keep the wrapped offsets collision-free
            double* in = buf->real();
            std::fill(in, in + ny * nx, 0.0);
            for (std::int64_t oy = -(l - 1); oy <= l - 1; ++oy) {
                const std::int64_t ry = (oy + ny) % ny;
                for (std::int64_t ox = -(n - 1); ox <= n - 1; ++ox) {
                    const std::int64_t rx = (ox + nx) % nx;
                    in[ry * nx + rx] = gen.at_offset(int(ox), int(oy));
                }
            }
            fftw_execute_dft_r2c(fwd, in, cbuf->cplx());
            lambda.resize(std::size_t(ny * ncx));
            for (std::int64_t i = 0; i < ny * ncx; ++i) lambda[std::size_t(i)] = cbuf->cplx()[i][0];
        }

        ~Path2D() {
            fftw_destroy_plan(fwd);
            fftw_destroy_plan(bwd);
        }

        std::vector<double> apply(const std::vector<double>& U) const {
            double* in = buf->real();
            fftw_complex* spec = cbuf->cplx();
            std::fill(in, in + ny * nx, 0.0);
            for (std::int64_t j = 0; j < l; ++j)
                std::copy(U.begin() + j * n, U.begin() + (j + 1) * n, in + j * nx);
            fftw_execute_dft_r2c(fwd, in, spec);
            const double scale = 1.0 / double(ny * nx);
            for (std::int64_t i = 0; i < ny * ncx; ++i) {
                const double s = lambda[std::size_t(i)] * scale;
                spec[i][0] *= s;
                spec[i][1] *= s;
            }
            fftw_execute_dft_c2r(bwd, spec, in);
            std::vector<double> out(U.size());
            for (std::int64_t j = 0; j < l; ++j)
                std::copy(in + j * nx, in + j * nx + n, out.begin() + j * n);
            return out;
        }
    };

    GeneratorVector gen_;
    std::int64_t m_ = 0, L_ = 0;
    bool use2d_ = false;
    mutable std::unique_ptr<Path1D> p1_;
    std::unique_ptr<Path2D> p2_;
};

inline std::vector<double> toeplitz_matvec(const ToeplitzOperator& op,
                                           const std::vector<double>& x) {
    return op.matvec(x);
}

/// Stiffness application A_k U in moment form.
inline MomentVector apply_stiffness(const ToeplitzOperator& op, const std::vector<double>& U,
                                    const MeshLevel& level) {
    if (op.generator().nk != level.nk || op.generator().lk != level.lk)
        throw usage_error("apply_stiffness: operator/level mismatch");
    if (std::int64_t(U.size()) != level.dofs())
        throw usage_error("apply_stiffness: coefficient vector length mismatch");
    MomentVector out;
    out.level = level.k;
    out.values = op.apply_mesh(U);
    return out;
}

} // namespace fracmg
