#ifndef TFDW_FFT_HPP
#define TFDW_FFT_HPP

#include <fftw3.h>

#include <array>
#include <complex>
#include <cstdlib>
#include <mutex>
#include <string>
#include <vector>

#include "tfdw/errors.hpp"
#include "tfdw/grid.hpp"

namespace tfdw {

// fftw_plan creation/destruction is not thread-safe; executes are.
inline std::mutex& fftw_mutex() {
    static std::mutex m;
    return m;
}

// Intra-run parallelism cap. FFTW threading is enabled once with the value
// of TFDW_THREADS (default 1: plans are then bit-reproducible regardless of
// the host).
inline int planned_threads() {
    static int n = [] {
        int v = 1;
        if (const char* e = std::getenv("TFDW_THREADS")) {
            int p = std::atoi(e);
            if (p >= 1) v = p;
        }
#ifdef TFDW_FFTW_THREADS
        fftw_init_threads();
        fftw_plan_with_nthreads(v);
#endif
        return v;
    }();
    return n;
}

template <typename T>
struct FftwBuffer {
    T* data = nullptr;
    std::size_t n = 0;
    FftwBuffer() = default;
    explicit FftwBuffer(std::size_t count) { allocate(count); }
    ~FftwBuffer() { release(); }
    FftwBuffer(const FftwBuffer&) = delete;
    FftwBuffer& operator=(const FftwBuffer&) = delete;
    FftwBuffer(FftwBuffer&& o) noexcept : data(o.data), n(o.n) {
        o.data = nullptr;
        o.n = 0;
    }
    void allocate(std::size_t count) {
        release();
        data = static_cast<T*>(fftw_malloc(sizeof(T) * count));
        if (!data) throw error("fftw_malloc failed");
        n = count;
    }
    void release() {
        if (data) fftw_free(data);
        data = nullptr;
        n = 0;
    }
};

// Real 3D FFT pair (r2c forward, c2r backward) on a fixed-size box,
// with its own in/out buffers. One instance per task; not shareable.
class RealFft3 {
  public:
    explicit RealFft3(std::array<int, 3> dims) : dims_(dims) {
        nreal_ = std::size_t(dims[0]) * dims[1] * dims[2];
        ncplx_ = std::size_t(dims[0]) * dims[1] * (dims[2] / 2 + 1);
        real_.allocate(nreal_);
        cplx_.allocate(ncplx_);
        std::lock_guard<std::mutex> lock(fftw_mutex());
        planned_threads();
        fwd_ = fftw_plan_dft_r2c_3d(dims[0], dims[1], dims[2], real_.data,
                                    cplx_.data, FFTW_ESTIMATE);
        bwd_ = fftw_plan_dft_c2r_3d(dims[0], dims[1], dims[2], cplx_.data,
                                    real_.data, FFTW_ESTIMATE);
        if (!fwd_ || !bwd_) throw error("fftw plan creation failed");
    }
    ~RealFft3() {
        std::lock_guard<std::mutex> lock(fftw_mutex());
        if (fwd_) fftw_destroy_plan(fwd_);
        if (bwd_) fftw_destroy_plan(bwd_);
    }
    RealFft3(const RealFft3&) = delete;
    RealFft3& operator=(const RealFft3&) = delete;

    std::array<int, 3> dims() const { return dims_; }
    std::size_t n_real() const { return nreal_; }
    std::size_t n_complex() const { return ncplx_; }
    double* real_data() { return real_.data; }
    fftw_complex* complex_data() { return cplx_.data; }

    void forward() { fftw_execute(fwd_); }
    void backward() { fftw_execute(bwd_); }  // unnormalized (scale by 1/N)

  private:
    std::array<int, 3> dims_;
    std::size_t nreal_ = 0, ncplx_ = 0;
    FftwBuffer<double> real_;
    FftwBuffer<fftw_complex> cplx_;
    fftw_plan fwd_ = nullptr, bwd_ = nullptr;
};

// Inverse of the 7-point Dirichlet operator (-Lap + shift) via DST-I
// (RODFT00), matching the zero-halo stencil used by the energy module.
class DirichletPoisson {
  public:
    DirichletPoisson(const GridSpec& grid, double shift)
        : grid_(grid), shift_(shift) {
        n_ = grid.size();
        buf_.allocate(n_);
        {
            std::lock_guard<std::mutex> lock(fftw_mutex());
            planned_threads();
            plan_ = fftw_plan_r2r_3d(grid.dims[0], grid.dims[1], grid.dims[2],
                                     buf_.data, buf_.data, FFTW_RODFT00,
                                     FFTW_RODFT00, FFTW_RODFT00, FFTW_ESTIMATE);
            if (!plan_) throw error("fftw DST plan creation failed");
        }
        double h2 = grid.spacing * grid.spacing;
        for (int d = 0; d < 3; ++d) {
            eig_[d].resize(grid.dims[d]);
            for (int k = 0; k < grid.dims[d]; ++k) {
                double s = std::sin(M_PI * (k + 1) / (2.0 * (grid.dims[d] + 1)));
                eig_[d][k] = 4.0 * s * s / h2;
            }
        }
        norm_ = 1.0;
        for (int d = 0; d < 3; ++d) norm_ *= 2.0 * (grid.dims[d] + 1);
    }
    ~DirichletPoisson() {
        std::lock_guard<std::mutex> lock(fftw_mutex());
        if (plan_) fftw_destroy_plan(plan_);
    }
    DirichletPoisson(const DirichletPoisson&) = delete;
    DirichletPoisson& operator=(const DirichletPoisson&) = delete;

    const GridSpec& grid() const { return grid_; }
    double shift() const { return shift_; }

    // out = (-Lap_h + shift)^{-1} in
    void apply_inverse(const std::vector<double>& in, std::vector<double>& out) {
        if (in.size() != n_) throw config_error("DirichletPoisson: size mismatch");
        for (std::size_t i = 0; i < n_; ++i) buf_.data[i] = in[i];
        fftw_execute(plan_);
        const auto& d = grid_.dims;
        std::size_t idx = 0;
        for (int ix = 0; ix < d[0]; ++ix)
            for (int iy = 0; iy < d[1]; ++iy)
                for (int iz = 0; iz < d[2]; ++iz, ++idx)
                    buf_.data[idx] /=
                        norm_ * (eig_[0][ix] + eig_[1][iy] + eig_[2][iz] + shift_);
        fftw_execute(plan_);
        out.resize(n_);
        for (std::size_t i = 0; i < n_; ++i) out[i] = buf_.data[i];
    }

  private:
    GridSpec grid_;
    double shift_;
    std::size_t n_ = 0;
    FftwBuffer<double> buf_;
    fftw_plan plan_ = nullptr;
    std::array<std::vector<double>, 3> eig_;
    double norm_ = 1.0;
};

}  // namespace tfdw

#endif
