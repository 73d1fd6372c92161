#ifndef TFDW_POTENTIALS_HPP
#define TFDW_POTENTIALS_HPP

#include <cmath>
#include <vector>

#include "tfdw/grid.hpp"

namespace tfdw {

struct NuclearSite {
    double charge = 1.0;  // alpha_k > 0
    Vec3 position{0, 0, 0};
};

enum class PotentialClass { short_range, long_range };

// Background potential V = sum_k alpha_k/|x-r_k|^tau + Z/|x|^nu, sampled with
// regularized singularities of width `a`.
struct PotentialSpec {
    std::vector<NuclearSite> sites;
    double Z = 0.0;         // long-range perturbation strength, >= 0
    double nu = 0.5;        // perturbation exponent, in (0,1) when Z > 0
    double tau = 1.0;       // nuclear exponent, in (0,2); 1 = molecular V_TF
    double reg_width = 0.25;  // a > 0

    double total_charge() const {
        double z = 0.0;
        for (const auto& s : sites) z += s.charge;
        return z;
    }

    void validate() const {
        for (const auto& s : sites)
            if (!(s.charge > 0.0)) throw config_error("nuclear charge must be positive");
        if (Z < 0.0) throw config_error("perturbation strength Z must be >= 0");
        if (Z > 0.0 && !(nu > 0.0 && nu < 1.0))
            throw config_error("perturbation exponent nu must lie in (0,1)");
        if (!(tau > 0.0 && tau < 2.0))
            throw config_error("nuclear exponent tau must lie in (0,2)");
        if (!(reg_width > 0.0)) throw config_error("regularization width must be positive");
    }
};

// erf-smeared Coulomb: erf(r/(sqrt2 a))/r, value sqrt(2/pi)/a at r=0.
// Below exact 1/r everywhere, equal within 1e-10 for r >= 8a.
inline double regularized_coulomb(double r, double a) {
    double t = r / (std::sqrt(2.0) * a);
    if (t < 1e-8) return std::sqrt(2.0 / M_PI) / a;
    return std::erf(t) / r;
}

// |x|^{-p} capped at a^{-p} inside radius a; used for the nu-perturbation
// and for nuclear exponents tau != 1.
inline double capped_power(double r, double p, double a) {
    return std::pow(std::max(r, a), -p);
}

// Sample V >= 0 on the grid, finite everywhere. Requires a >= h/2 and, when
// sites are present, each nucleus inside the box with margin >= 8a.
inline Field sample_potential(const PotentialSpec& spec, const GridSpec& grid) {
    spec.validate();
    grid.validate();
    const double a = spec.reg_width;
    if (a < grid.spacing / 2)
        throw under_resolved_error(
            "regularization width must be at least half the grid spacing");
    for (const auto& s : spec.sites)
        for (int d = 0; d < 3; ++d) {
            double lo = grid.origin[d], hi = grid.origin[d] + (grid.dims[d] - 1) * grid.spacing;
            if (s.position[d] < lo + 8 * a || s.position[d] > hi - 8 * a)
                throw config_error("nucleus must lie inside the box with margin >= 8a");
        }
    Field V(grid);
    for (int ix = 0; ix < grid.dims[0]; ++ix)
        for (int iy = 0; iy < grid.dims[1]; ++iy)
            for (int iz = 0; iz < grid.dims[2]; ++iz) {
                Vec3 p = grid.position(ix, iy, iz);
                double v = 0.0;
                for (const auto& s : spec.sites) {
                    double r = norm(p - s.position);
                    v += s.charge * (spec.tau == 1.0 ? regularized_coulomb(r, a)
                                                     : capped_power(r, spec.tau, a));
                }
                if (spec.Z > 0.0) v += spec.Z * capped_power(norm(p), spec.nu, a);
                V.values[grid.index(ix, iy, iz)] = v;
            }
    return V;
}

// Long-range iff t * inf_{|x|=t} V(x) -> infinity: true exactly when the
// Z/|x|^nu term is present (nu < 1); pure V_TF gives t*V -> total charge.
inline PotentialClass classify(const PotentialSpec& spec) {
    spec.validate();
    return (spec.Z > 0.0) ? PotentialClass::long_range : PotentialClass::short_range;
}

// h^3 sum V u^2: the magnitude of the attractive coupling (the energy
// assembler subtracts it).
inline double external_energy(const Field& u, const Field& V) {
    require_same_grid(u, V, "external_energy");
    double s = 0.0;
    for (std::size_t i = 0; i < u.values.size(); ++i)
        s += V.values[i] * u.values[i] * u.values[i];
    return u.grid.cell_volume() * s;
}

}  // namespace tfdw

#endif
