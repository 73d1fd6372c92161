#ifndef TFDW_COULOMB_HPP
#define TFDW_COULOMB_HPP

#include <cmath>
#include <map>
#include <memory>

#include "tfdw/fft.hpp"
#include "tfdw/grid.hpp"

namespace tfdw {

// Mean of 1/|x| over the cell [-h/2,h/2]^3, from the closed-form corner
// integral of 1/r over a cuboid.
inline double inv_r_corner_integral(double a, double b, double c) {
    double r = std::sqrt(a * a + b * b + c * c);
    return b * c * std::log((a + r) / std::sqrt(b * b + c * c)) +
           a * c * std::log((b + r) / std::sqrt(a * a + c * c)) +
           a * b * std::log((c + r) / std::sqrt(a * a + b * b)) -
           0.5 * a * a * std::atan2(b * c, a * r) -
           0.5 * b * b * std::atan2(a * c, b * r) -
           0.5 * c * c * std::atan2(a * b, c * r);
}

inline double inv_r_cell_average(double h) {
    return 8.0 * inv_r_corner_integral(h / 2, h / 2, h / 2) / (h * h * h);
}

// Free-space Coulomb kernel for fields on a fixed lattice (dims, spacing):
// 1/|x| sampled on a zero-padded grid of >= 2x extent per axis, origin cell
// replaced by its analytic cell average. Holds the kernel's Fourier
// transform; immutable and shareable after construction.
class CoulombKernel {
  public:
    explicit CoulombKernel(const GridSpec& grid)
        : dims_(grid.dims), spacing_(grid.spacing) {
        grid.validate();
        for (int d = 0; d < 3; ++d) padded_[d] = 2 * dims_[d];
        RealFft3 fft(padded_);
        const double h = spacing_;
        double* k = fft.real_data();
        std::size_t idx = 0;
        for (int ix = 0; ix < padded_[0]; ++ix) {
            double dx = h * (ix <= padded_[0] / 2 ? ix : ix - padded_[0]);
            for (int iy = 0; iy < padded_[1]; ++iy) {
                double dy = h * (iy <= padded_[1] / 2 ? iy : iy - padded_[1]);
                for (int iz = 0; iz < padded_[2]; ++iz, ++idx) {
                    double dz = h * (iz <= padded_[2] / 2 ? iz : iz - padded_[2]);
                    double r = std::sqrt(dx * dx + dy * dy + dz * dz);
                    k[idx] = (r == 0.0) ? inv_r_cell_average(h) : 1.0 / r;
                }
            }
        }
        fft.forward();
        // even kernel => real transform
        khat_.resize(fft.n_complex());
        for (std::size_t i = 0; i < khat_.size(); ++i) khat_[i] = fft.complex_data()[i][0];
    }

    const std::array<int, 3>& dims() const { return dims_; }
    const std::array<int, 3>& padded_dims() const { return padded_; }
    double spacing() const { return spacing_; }

    // The real-space kernel sample for a displacement of (ix,iy,iz) cells.
    // Brute-force checks use exactly these values.
    double kernel_value(int ix, int iy, int iz) const {
        if (ix == 0 && iy == 0 && iz == 0) return inv_r_cell_average(spacing_);
        double r = spacing_ * std::sqrt(double(ix) * ix + double(iy) * iy + double(iz) * iz);
        return 1.0 / r;
    }

    void require_compatible(const Field& u, const char* what) const {
        if (u.grid.dims != dims_ || u.grid.spacing != spacing_)
            throw config_error(std::string(what) +
                               ": kernel built for a different lattice (insufficient padding)");
    }

    // w = (u^2 * 1/|x|) via zero-padded convolution; w(x) ~ int u^2(y)/|x-y| dy.
    Field hartree_potential(const Field& u) const {
        require_compatible(u, "hartree_potential");
        require_finite(u);
        RealFft3& fft = workspace();
        double* re = fft.real_data();
        std::fill(re, re + fft.n_real(), 0.0);
        const auto& g = u.grid;
        for (int ix = 0; ix < dims_[0]; ++ix)
            for (int iy = 0; iy < dims_[1]; ++iy) {
                const double* src = &u.values[g.index(ix, iy, 0)];
                double* dst = &re[(std::size_t(ix) * padded_[1] + iy) * padded_[2]];
                for (int iz = 0; iz < dims_[2]; ++iz) dst[iz] = src[iz] * src[iz];
            }
        fft.forward();
        const double scale =
            g.cell_volume() /
            (double(padded_[0]) * double(padded_[1]) * double(padded_[2]));
        fftw_complex* c = fft.complex_data();
        for (std::size_t i = 0; i < khat_.size(); ++i) {
            double m = khat_[i] * scale;
            c[i][0] *= m;
            c[i][1] *= m;
        }
        fft.backward();
        Field w(g);
        for (int ix = 0; ix < dims_[0]; ++ix)
            for (int iy = 0; iy < dims_[1]; ++iy) {
                const double* src = &re[(std::size_t(ix) * padded_[1] + iy) * padded_[2]];
                double* dst = &w.values[g.index(ix, iy, 0)];
                for (int iz = 0; iz < dims_[2]; ++iz) dst[iz] = src[iz];
            }
        return w;
    }

  private:
    // per-thread scratch FFT; plans are cheap (FFTW_ESTIMATE) and reused
    RealFft3& workspace() const {
        thread_local std::map<std::array<int, 3>, std::unique_ptr<RealFft3>> cache;
        auto& slot = cache[padded_];
        if (!slot) slot = std::make_unique<RealFft3>(padded_);
        return *slot;
    }

    std::array<int, 3> dims_, padded_;
    double spacing_;
    std::vector<double> khat_;
};

// D(u) = 1/2 int int u^2(x) u^2(y)/|x-y|; nonnegative, zero iff u == 0.
inline double hartree_energy(const Field& u, const CoulombKernel& k,
                             const Field* precomputed_w = nullptr) {
    Field w_local;
    const Field* w = precomputed_w;
    if (!w) {
        w_local = k.hartree_potential(u);
        w = &w_local;
    }
    double s = 0.0;
    for (std::size_t i = 0; i < u.values.size(); ++i)
        s += u.values[i] * u.values[i] * w->values[i];
    return 0.5 * u.grid.cell_volume() * s;
}

// int int u1^2(x) u2^2(y)/|x-y| dx dy (no 1/2); symmetric in its arguments.
inline double pair_interaction(const Field& u1, const Field& u2,
                               const CoulombKernel& k) {
    require_same_grid(u1, u2, "pair_interaction");
    Field w2 = k.hartree_potential(u2);
    double s = 0.0;
    for (std::size_t i = 0; i < u1.values.size(); ++i)
        s += u1.values[i] * u1.values[i] * w2.values[i];
    return u1.grid.cell_volume() * s;
}

}  // namespace tfdw

#endif
