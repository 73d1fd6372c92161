#ifndef TFDW_ENERGY_HPP
#define TFDW_ENERGY_HPP

#include <cmath>

#include "tfdw/coulomb.hpp"
#include "tfdw/grid.hpp"
#include "tfdw/potentials.hpp"

namespace tfdw {

struct ModelParams {
    double c1 = 1.0;
    double c2 = 1.0;

    void validate() const {
        if (!(c1 > 0.0) || !(c2 > 0.0))
            throw config_error("model constants c1, c2 must be positive");
    }
};

// E_V(u) = kinetic + p_term - x_term - external + hartree, all parts >= 0.
struct EnergyBreakdown {
    double kinetic = 0.0;   // int |grad u|^2
    double p_term = 0.0;    // c1 int |u|^{10/3}
    double x_term = 0.0;    // c2 int |u|^{8/3}
    double external = 0.0;  // int V u^2
    double hartree = 0.0;   // 1/2 int int u^2(x) u^2(y) / |x-y|
    double total = 0.0;
};

// int |grad u|^2 as the Dirichlet form of the 7-point Laplacian: sum of
// squared forward differences over all links, zero halo outside the box.
// This makes the energy exactly dual to neg_laplacian below.
inline double dirichlet_form(const Field& u) {
    const auto& g = u.grid;
    const int nx = g.dims[0], ny = g.dims[1], nz = g.dims[2];
    const double* v = u.values.data();
    const std::size_t sx = std::size_t(ny) * nz, sy = nz;
    double acc = 0.0;
    for (int ix = 0; ix < nx; ++ix)
        for (int iy = 0; iy < ny; ++iy) {
            const double* row = v + ix * sx + iy * sy;
            for (int iz = 0; iz < nz; ++iz) {
                double c = row[iz];
                double dx = (ix + 1 < nx ? row[sx + iz] : 0.0) - c;
                double dy = (iy + 1 < ny ? row[sy + iz] : 0.0) - c;
                double dz = (iz + 1 < nz ? row[iz + 1] : 0.0) - c;
                acc += dx * dx + dy * dy + dz * dz;
                if (ix == 0) acc += c * c;
                if (iy == 0) acc += c * c;
                if (iz == 0) acc += c * c;
            }
        }
    return acc * g.spacing;
}

// -Lap u, 7-point stencil, zero Dirichlet halo.
inline Field neg_laplacian(const Field& u) {
    const auto& g = u.grid;
    const int nx = g.dims[0], ny = g.dims[1], nz = g.dims[2];
    const double h2 = g.spacing * g.spacing;
    const double* v = u.values.data();
    Field out(g);
    const std::size_t sx = std::size_t(ny) * nz, sy = nz;
    for (int ix = 0; ix < nx; ++ix)
        for (int iy = 0; iy < ny; ++iy) {
            const double* row = v + ix * sx + iy * sy;
            double* orow = out.values.data() + ix * sx + iy * sy;
            for (int iz = 0; iz < nz; ++iz) {
                double s = 6.0 * row[iz];
                if (ix + 1 < nx) s -= row[sx + iz];
                if (ix > 0) s -= row[iz - sx];
                if (iy + 1 < ny) s -= row[sy + iz];
                if (iy > 0) s -= row[iz - sy];
                if (iz + 1 < nz) s -= row[iz + 1];
                if (iz > 0) s -= row[iz - 1];
                orow[iz] = s / h2;
            }
        }
    return out;
}

// Full energy assembly. `w` may pass a precomputed Hartree potential of u.
inline EnergyBreakdown energy(const Field& u, const Field& V, const ModelParams& p,
                              const CoulombKernel& k, const Field* w = nullptr) {
    p.validate();
    require_same_grid(u, V, "energy");
    require_finite(u);
    EnergyBreakdown b;
    b.kinetic = dirichlet_form(u);
    double sp = 0.0, sx = 0.0, se = 0.0;
    for (std::size_t i = 0; i < u.values.size(); ++i) {
        double a = std::abs(u.values[i]);
        double a2 = a * a;
        double c = std::cbrt(a);           // a^{1/3}
        sp += a2 * a * c;                  // a^{10/3}
        sx += a2 * c * c;                  // a^{8/3}
        se += V.values[i] * a2;
    }
    double vol = u.grid.cell_volume();
    b.p_term = p.c1 * vol * sp;
    b.x_term = p.c2 * vol * sx;
    b.external = vol * se;
    b.hartree = hartree_energy(u, k, w);
    b.total = b.kinetic + b.p_term - b.x_term - b.external + b.hartree;
    return b;
}

// g = -Lap u + (5/3) c1 u|u|^{4/3} - (4/3) c2 u|u|^{2/3} - V u + w u,
// i.e. half the Frechet derivative of E_V: at a constrained critical point
// g = mu * u. `w` may pass a precomputed Hartree potential.
inline Field gradient(const Field& u, const Field& V, const ModelParams& p,
                      const CoulombKernel& k, const Field* w = nullptr) {
    p.validate();
    require_same_grid(u, V, "gradient");
    Field w_local;
    if (!w) {
        w_local = k.hartree_potential(u);
        w = &w_local;
    }
    Field g = neg_laplacian(u);
    const double fp = (5.0 / 3.0) * p.c1, fx = (4.0 / 3.0) * p.c2;
    for (std::size_t i = 0; i < u.values.size(); ++i) {
        double v = u.values[i];
        double a = std::abs(v);
        double c = std::cbrt(a);
        g.values[i] += fp * v * a * c        // u|u|^{4/3}
                       - fx * v * c * c      // u|u|^{2/3}
                       - V.values[i] * v + w->values[i] * v;
    }
    return g;
}

// mu = <g, u> / mass(u).
inline double lagrange_multiplier(const Field& u, const Field& g) {
    double m = mass(u);
    if (m <= 0.0) throw degenerate_field_error("lagrange_multiplier: zero-mass field");
    return inner(g, u) / m;
}

// 2*kinetic + 2*p_term - x_term + hartree: the sigma-derivative of the
// energy under the mass-preserving dilation sigma^{3/2} u(sigma x), which
// vanishes at exact minimizers of the V == 0 problem.
inline double virial_residual(const EnergyBreakdown& b) {
    return 2.0 * b.kinetic + 2.0 * b.p_term - b.x_term + b.hartree;
}

inline double virial_residual(const Field& u, const ModelParams& p,
                              const CoulombKernel& k) {
    Field V0(u.grid);
    return virial_residual(energy(u, V0, p, k));
}

// |mu M - (-(2/3) int|grad u|^2 - 1/2 c2 int|u|^{8/3} + (7/12) intint u^2u^2/|x-y|)|,
// the substituted multiplier identity at V == 0 critical points.
inline double mu_identity_residual(const EnergyBreakdown& b, double M, double mu) {
    double rhs = -(2.0 / 3.0) * b.kinetic - 0.5 * b.x_term + (7.0 / 6.0) * b.hartree;
    return std::abs(mu * M - rhs);
}

inline double mu_identity_check(const Field& u, const ModelParams& p,
                                const CoulombKernel& k, double mu) {
    Field V0(u.grid);
    return mu_identity_residual(energy(u, V0, p, k), mass(u), mu);
}

// Appendix-style shape integrals (A,B,C,D) of the unit-mass profile.
struct ShapeIntegrals {
    double A = 0.0;  // int |grad u|^2
    double B = 0.0;  // c1 int |u|^{10/3}
    double C = 0.0;  // c2 int |u|^{8/3}
    double D = 0.0;  // 1/2 intint u^2 u^2/|x-y|
};

inline ShapeIntegrals shape_integrals(const Field& u, const ModelParams& p,
                                      const CoulombKernel& k) {
    double m = mass(u);
    if (m <= 0.0) throw degenerate_field_error("shape_integrals: zero field");
    Field v = rescale_mass(u, 1.0);
    Field V0(v.grid);
    EnergyBreakdown b = energy(v, V0, p, k);
    return {b.kinetic, b.p_term, b.x_term, b.hartree};
}

}  // namespace tfdw

#endif
