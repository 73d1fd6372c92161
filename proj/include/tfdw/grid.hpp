#ifndef TFDW_GRID_HPP
#define TFDW_GRID_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "tfdw/errors.hpp"

namespace tfdw {

using Vec3 = std::array<double, 3>;

inline double norm(const Vec3& v) {
    return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
}

inline Vec3 operator-(const Vec3& a, const Vec3& b) {
    return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}

inline Vec3 operator+(const Vec3& a, const Vec3& b) {
    return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}

inline Vec3 operator*(double s, const Vec3& a) {
    return {s * a[0], s * a[1], s * a[2]};
}

// Uniform grid over the box [origin, origin + (n-1)*h] per axis.
// Values are stored z-fastest: index = (ix*ny + iy)*nz + iz.
struct GridSpec {
    std::array<int, 3> dims{8, 8, 8};
    double spacing = 1.0;
    Vec3 origin{0.0, 0.0, 0.0};

    std::size_t size() const {
        return std::size_t(dims[0]) * dims[1] * dims[2];
    }
    std::size_t index(int ix, int iy, int iz) const {
        return (std::size_t(ix) * dims[1] + iy) * dims[2] + iz;
    }
    Vec3 position(int ix, int iy, int iz) const {
        return {origin[0] + ix * spacing, origin[1] + iy * spacing,
                origin[2] + iz * spacing};
    }
    // Physical extent per axis, (n-1)*h.
    Vec3 extent() const {
        return {(dims[0] - 1) * spacing, (dims[1] - 1) * spacing,
                (dims[2] - 1) * spacing};
    }
    double cell_volume() const { return spacing * spacing * spacing; }

    bool operator==(const GridSpec& o) const {
        return dims == o.dims && spacing == o.spacing && origin == o.origin;
    }

    void validate() const {
        for (int d = 0; d < 3; ++d)
            if (dims[d] < 8)
                throw config_error("grid dims must be >= 8 per axis");
        if (!(spacing > 0.0))
            throw config_error("grid spacing must be positive");
    }

    // Cube grid of n^3 points centered on the coordinate origin with the
    // given physical side length, h = side/(n-1).
    static GridSpec centered_cube(int n, double side) {
        GridSpec g;
        g.dims = {n, n, n};
        g.spacing = side / (n - 1);
        g.origin = {-side / 2, -side / 2, -side / 2};
        g.validate();
        return g;
    }

    static GridSpec centered_box(std::array<int, 3> n, Vec3 side) {
        GridSpec g;
        g.dims = n;
        g.spacing = side[0] / (n[0] - 1);
        for (int d = 0; d < 3; ++d) {
            double h = side[d] / (n[d] - 1);
            if (std::abs(h - g.spacing) > 1e-12 * g.spacing)
                throw config_error("centered_box requires equal spacing per axis");
            g.origin[d] = -side[d] / 2;
        }
        g.validate();
        return g;
    }
};

// Real scalar field sampled on a GridSpec. Outside the box the field is
// treated as identically zero.
struct Field {
    GridSpec grid;
    std::vector<double> values;

    Field() = default;
    explicit Field(const GridSpec& g) : grid(g), values(g.size(), 0.0) {}

    double& operator()(int ix, int iy, int iz) {
        return values[grid.index(ix, iy, iz)];
    }
    double operator()(int ix, int iy, int iz) const {
        return values[grid.index(ix, iy, iz)];
    }
};

inline void require_same_grid(const Field& a, const Field& b, const char* what) {
    if (!(a.grid == b.grid))
        throw config_error(std::string(what) + ": fields live on different grids");
}

inline void require_finite(const Field& u) {
    for (double v : u.values)
        if (!std::isfinite(v)) throw invalid_field_error("field has non-finite values");
}

inline double max_abs(const Field& u) {
    double m = 0.0;
    for (double v : u.values) m = std::max(m, std::abs(v));
    return m;
}

inline double min_value(const Field& u) {
    double m = u.values.empty() ? 0.0 : u.values[0];
    for (double v : u.values) m = std::min(m, v);
    return m;
}

// mass(u) = h^3 sum u^2, the squared L2 norm.
inline double mass(const Field& u) {
    require_finite(u);
    double s = 0.0;
    for (double v : u.values) s += v * v;
    return u.grid.cell_volume() * s;
}

// L2 inner product h^3 <a, b>.
inline double inner(const Field& a, const Field& b) {
    require_same_grid(a, b, "inner");
    double s = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) s += a.values[i] * b.values[i];
    return a.grid.cell_volume() * s;
}

inline double l2_norm(const Field& a) { return std::sqrt(mass(a)); }

// Scale u so that mass(result) == M exactly (up to roundoff).
inline Field rescale_mass(const Field& u, double M) {
    if (!(M > 0.0)) throw config_error("rescale_mass: target mass must be positive");
    double m0 = mass(u);
    if (m0 <= 0.0) throw degenerate_field_error("rescale_mass: zero input field");
    Field out = u;
    double s = std::sqrt(M / m0);
    for (double& v : out.values) v *= s;
    return out;
}

// Smooth cutoff profile of Eq.-style truncations: phi(t) = 1 for t <= 0,
// 0 for t >= 1, quintic smoothstep in between. sup|phi'| = 15/8 <= 2.
struct CutoffProfile {
    static constexpr double derivative_bound = 2.0;

    double operator()(double t) const {
        if (t <= 0.0) return 1.0;
        if (t >= 1.0) return 0.0;
        return 1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
    }
    double derivative(double t) const {
        if (t <= 0.0 || t >= 1.0) return 0.0;
        double s = t * (1.0 - t);
        return -30.0 * s * s;
    }
};

// Multiply u by phi(|x - center| - rho + 1): unchanged inside B_{rho-1},
// zero outside B_rho.
inline Field truncate_ball(const Field& u, const Vec3& center, double rho,
                           const CutoffProfile& phi = CutoffProfile{}) {
    if (!(rho > 1.0)) throw config_error("truncate_ball: rho must exceed 1");
    require_finite(u);
    Field out(u.grid);
    const auto& g = u.grid;
    for (int ix = 0; ix < g.dims[0]; ++ix)
        for (int iy = 0; iy < g.dims[1]; ++iy)
            for (int iz = 0; iz < g.dims[2]; ++iz) {
                double r = norm(g.position(ix, iy, iz) - center);
                double f = phi(r - rho + 1.0);
                if (f != 0.0)
                    out.values[g.index(ix, iy, iz)] = f * u.values[g.index(ix, iy, iz)];
            }
    return out;
}

// Trilinear sample of u at physical point p; zero outside the box.
inline double sample_trilinear(const Field& u, const Vec3& p) {
    const auto& g = u.grid;
    double fx = (p[0] - g.origin[0]) / g.spacing;
    double fy = (p[1] - g.origin[1]) / g.spacing;
    double fz = (p[2] - g.origin[2]) / g.spacing;
    int ix = int(std::floor(fx)), iy = int(std::floor(fy)), iz = int(std::floor(fz));
    double tx = fx - ix, ty = fy - iy, tz = fz - iz;
    double acc = 0.0;
    for (int dx = 0; dx < 2; ++dx)
        for (int dy = 0; dy < 2; ++dy)
            for (int dz = 0; dz < 2; ++dz) {
                int jx = ix + dx, jy = iy + dy, jz = iz + dz;
                if (jx < 0 || jy < 0 || jz < 0 || jx >= g.dims[0] ||
                    jy >= g.dims[1] || jz >= g.dims[2])
                    continue;
                double w = (dx ? tx : 1 - tx) * (dy ? ty : 1 - ty) * (dz ? tz : 1 - tz);
                acc += w * u.values[g.index(jx, jy, jz)];
            }
    return acc;
}

// Mass-preserving dilation sigma^{3/2} u(sigma x) about the coordinate
// origin, by trilinear interpolation. The support of the result must stay
// inside the box; for sigma < 1 this is checked against the support of u.
inline Field dilate(const Field& u, double sigma) {
    if (!(sigma > 0.0)) throw config_error("dilate: sigma must be positive");
    require_finite(u);
    const auto& g = u.grid;
    if (sigma < 1.0) {
        // support of result = (1/sigma) * support of u
        double amp = max_abs(u);
        if (amp > 0.0) {
            double thr = 1e-13 * amp;
            Vec3 lo{1e300, 1e300, 1e300}, hi{-1e300, -1e300, -1e300};
            for (int ix = 0; ix < g.dims[0]; ++ix)
                for (int iy = 0; iy < g.dims[1]; ++iy)
                    for (int iz = 0; iz < g.dims[2]; ++iz)
                        if (std::abs(u.values[g.index(ix, iy, iz)]) > thr) {
                            Vec3 p = g.position(ix, iy, iz);
                            for (int d = 0; d < 3; ++d) {
                                lo[d] = std::min(lo[d], p[d]);
                                hi[d] = std::max(hi[d], p[d]);
                            }
                        }
            for (int d = 0; d < 3; ++d) {
                double half = g.spacing / 2;
                if (lo[d] / sigma < g.origin[d] - half ||
                    hi[d] / sigma > g.origin[d] + (g.dims[d] - 1) * g.spacing + half)
                    throw domain_error("dilate: support escapes the box");
            }
        }
    }
    Field out(g);
    double amp = std::pow(sigma, 1.5);
    for (int ix = 0; ix < g.dims[0]; ++ix)
        for (int iy = 0; iy < g.dims[1]; ++iy)
            for (int iz = 0; iz < g.dims[2]; ++iz) {
                Vec3 p = g.position(ix, iy, iz);
                out.values[g.index(ix, iy, iz)] =
                    amp * sample_trilinear(u, {sigma * p[0], sigma * p[1], sigma * p[2]});
            }
    return out;
}

// ---- TFD1 snapshot format -------------------------------------------------
// magic "TFD1", u32 version=1, u32 nx,ny,nz, f64 origin[3], f64 spacing,
// then nx*ny*nz f64 values little-endian, z fastest.

inline void write_tfd1(const Field& u, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw error("cannot open for writing: " + path);
    f.write("TFD1", 4);
    auto w32 = [&](std::uint32_t v) { f.write(reinterpret_cast<const char*>(&v), 4); };
    auto w64 = [&](double v) { f.write(reinterpret_cast<const char*>(&v), 8); };
    w32(1);
    for (int d = 0; d < 3; ++d) w32(std::uint32_t(u.grid.dims[d]));
    for (int d = 0; d < 3; ++d) w64(u.grid.origin[d]);
    w64(u.grid.spacing);
    f.write(reinterpret_cast<const char*>(u.values.data()),
            std::streamsize(u.values.size() * 8));
    if (!f) throw error("write failed: " + path);
}

inline Field read_tfd1(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw error("cannot open: " + path);
    char magic[4];
    f.read(magic, 4);
    if (!f || std::memcmp(magic, "TFD1", 4) != 0)
        throw input_error("not a TFD1 file: " + path);
    auto r32 = [&]() { std::uint32_t v; f.read(reinterpret_cast<char*>(&v), 4); return v; };
    auto r64 = [&]() { double v; f.read(reinterpret_cast<char*>(&v), 8); return v; };
    std::uint32_t version = r32();
    if (version != 1) throw input_error("unsupported TFD1 version");
    GridSpec g;
    for (int d = 0; d < 3; ++d) g.dims[d] = int(r32());
    for (int d = 0; d < 3; ++d) g.origin[d] = r64();
    g.spacing = r64();
    g.validate();
    Field u(g);
    f.read(reinterpret_cast<char*>(u.values.data()), std::streamsize(u.values.size() * 8));
    if (!f) throw input_error("truncated TFD1 file: " + path);
    return u;
}

}  // namespace tfdw

#endif
