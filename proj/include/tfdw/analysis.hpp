#ifndef TFDW_ANALYSIS_HPP
#define TFDW_ANALYSIS_HPP

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <vector>

#include "tfdw/grid.hpp"

namespace tfdw {

struct Component {
    double mass = 0.0;
    Vec3 center{0, 0, 0};
    double peak = 0.0;
    double radius = 0.0;  // smallest ball around the center holding 99% mass
};

struct DecayShell {
    double r = 0.0;           // shell center distance sigma
    double mean_log_u = 0.0;  // mean ln u over the shell
    double local_lambda = 0.0;
    int count = 0;
};

struct DecayFit {
    std::vector<DecayShell> shells;
    double lambda = 0.0;   // global slope of -ln(sigma u) vs sigma
    double decades = 0.0;  // amplitude span of the fit window, in decades
    bool conclusive = false;
};

struct SplitReport {
    std::vector<Component> components;  // sorted by distance to the nuclei
    double total_mass = 0.0;
    double R_min = std::numeric_limits<double>::quiet_NaN();  // min pairwise center dist
    double R0 = std::numeric_limits<double>::quiet_NaN();  // nearest fleeing center dist
    double mass_deficit = 0.0;          // mass outside all kept components
    DecayFit decay;
    double mu = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

inline double dist_to_sites(const Vec3& p, const std::vector<Vec3>& sites) {
    if (sites.empty()) return norm(p);
    double d = std::numeric_limits<double>::infinity();
    for (const auto& s : sites) d = std::min(d, norm(p - s));
    return d;
}

}  // namespace detail

// Flood-fill connected regions of {u^2 >= threshold_frac * max u^2}, then
// assign every grid point to the nearest region by multi-source BFS (a
// Voronoi partition of the grid by component seeds), so component masses
// plus the exterior account for the total mass exactly. Components below
// the mass floor 1e-4 * M are folded into the exterior. Cells below an
// absolute amplitude floor of 1e-8 never seed a component, so noise-level
// fields report no components.
inline SplitReport detect_components(const Field& u, double threshold_frac,
                                     const std::vector<Vec3>& nuclei = {}) {
    if (!(threshold_frac > 0.0 && threshold_frac < 1.0))
        throw config_error("detect_components: threshold_frac must lie in (0,1)");
    require_finite(u);
    const auto& g = u.grid;
    const double M = mass(u);
    if (M <= 0.0) throw degenerate_field_error("detect_components: empty field");

    SplitReport rep;
    rep.total_mass = M;

    constexpr double amp_floor = 1e-8;
    double max_u2 = 0.0;
    for (double v : u.values) max_u2 = std::max(max_u2, v * v);
    const double thr = std::max(threshold_frac * max_u2, amp_floor * amp_floor);
    if (max_u2 < thr) {
        rep.mass_deficit = M;
        return rep;
    }

    const int nx = g.dims[0], ny = g.dims[1], nz = g.dims[2];
    const std::size_t n = g.size();
    std::vector<int> label(n, -1);
    auto for_neighbors = [&](std::size_t idx, auto&& fn) {
        int iz = int(idx % nz), iy = int((idx / nz) % ny), ix = int(idx / (std::size_t(ny) * nz));
        if (ix > 0) fn(idx - std::size_t(ny) * nz);
        if (ix + 1 < nx) fn(idx + std::size_t(ny) * nz);
        if (iy > 0) fn(idx - nz);
        if (iy + 1 < ny) fn(idx + nz);
        if (iz > 0) fn(idx - 1);
        if (iz + 1 < nz) fn(idx + 1);
    };

    // seed regions over the thresholded set
    int nregions = 0;
    std::deque<std::size_t> queue;
    for (std::size_t i = 0; i < n; ++i) {
        if (label[i] != -1 || u.values[i] * u.values[i] < thr) continue;
        int id = nregions++;
        label[i] = id;
        queue.push_back(i);
        while (!queue.empty()) {
            std::size_t c = queue.front();
            queue.pop_front();
            for_neighbors(c, [&](std::size_t nb) {
                if (label[nb] == -1 && u.values[nb] * u.values[nb] >= thr) {
                    label[nb] = id;
                    queue.push_back(nb);
                }
            });
        }
    }

    // grow each region to its basin: nearest-region BFS over the whole grid
    for (std::size_t i = 0; i < n; ++i)
        if (label[i] != -1) queue.push_back(i);
    while (!queue.empty()) {
        std::size_t c = queue.front();
        queue.pop_front();
        for_neighbors(c, [&](std::size_t nb) {
            if (label[nb] == -1) {
                label[nb] = label[c];
                queue.push_back(nb);
            }
        });
    }

    const double vol = g.cell_volume();
    std::vector<double> cmass(nregions, 0.0);
    std::vector<Vec3> ccenter(nregions, Vec3{0, 0, 0});
    std::vector<double> cpeak(nregions, 0.0);
    for (int ix = 0; ix < nx; ++ix)
        for (int iy = 0; iy < ny; ++iy)
            for (int iz = 0; iz < nz; ++iz) {
                std::size_t i = g.index(ix, iy, iz);
                int id = label[i];
                double dm = vol * u.values[i] * u.values[i];
                cmass[id] += dm;
                Vec3 p = g.position(ix, iy, iz);
                ccenter[id] = ccenter[id] + dm * p;
                cpeak[id] = std::max(cpeak[id], std::abs(u.values[i]));
            }

    const double mass_floor = 1e-4 * M;
    std::vector<int> kept(nregions, -1);
    for (int id = 0; id < nregions; ++id) {
        if (cmass[id] <= mass_floor) continue;
        Component comp;
        comp.mass = cmass[id];
        comp.center = (1.0 / cmass[id]) * ccenter[id];
        comp.peak = cpeak[id];
        kept[id] = int(rep.components.size());
        rep.components.push_back(comp);
    }

    // 99%-mass radius per kept component
    std::vector<std::vector<std::pair<double, double>>> radial(rep.components.size());
    for (int ix = 0; ix < nx; ++ix)
        for (int iy = 0; iy < ny; ++iy)
            for (int iz = 0; iz < nz; ++iz) {
                std::size_t i = g.index(ix, iy, iz);
                int kc = kept[label[i]];
                if (kc < 0) continue;
                double dm = vol * u.values[i] * u.values[i];
                radial[kc].push_back({norm(g.position(ix, iy, iz) - rep.components[kc].center), dm});
            }
    for (std::size_t c = 0; c < rep.components.size(); ++c) {
        auto& rs = radial[c];
        std::sort(rs.begin(), rs.end());
        double acc = 0.0, target = 0.99 * rep.components[c].mass;
        for (const auto& [r, dm] : rs) {
            acc += dm;
            if (acc >= target) {
                rep.components[c].radius = r;
                break;
            }
        }
    }

    std::sort(rep.components.begin(), rep.components.end(),
              [&](const Component& a, const Component& b) {
                  return detail::dist_to_sites(a.center, nuclei) <
                         detail::dist_to_sites(b.center, nuclei);
              });

    double total_comp = 0.0;
    for (const auto& c : rep.components) total_comp += c.mass;
    rep.mass_deficit = M - total_comp;

    if (rep.components.size() >= 2) {
        double rmin = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < rep.components.size(); ++i)
            for (std::size_t j = i + 1; j < rep.components.size(); ++j)
                rmin = std::min(rmin, norm(rep.components[i].center - rep.components[j].center));
        rep.R_min = rmin;
        double r0 = std::numeric_limits<double>::infinity();
        for (std::size_t i = 1; i < rep.components.size(); ++i)
            r0 = std::min(r0, detail::dist_to_sites(rep.components[i].center, nuclei));
        rep.R0 = r0;
    }
    return rep;
}

// Least-squares decay rate of u away from the component centers:
// shells in sigma(x) = min_i |x - center_i| between 1.5x the largest
// component radius and the box margin. The fitted lambda is the slope of
// -ln(sigma u) vs sigma; the raw ln u span of the window is reported in
// decades. Radial Green-function decay in 3D carries a 1/sigma prefactor,
// which a raw ln u slope would absorb as an upward bias of order 1/sigma.
inline DecayFit decay_fit(const Field& u, SplitReport& report,
                          double u_floor = 1e-12) {
    if (report.components.empty())
        throw config_error("decay_fit: report has no components");
    const auto& g = u.grid;
    double rad = 0.0;
    for (const auto& c : report.components) rad = std::max(rad, c.radius);
    double r_lo = 1.5 * rad;
    double r_hi = std::numeric_limits<double>::infinity();
    for (const auto& c : report.components)
        for (int d = 0; d < 3; ++d) {
            double lo_face = c.center[d] - g.origin[d];
            double hi_face = g.origin[d] + (g.dims[d] - 1) * g.spacing - c.center[d];
            r_hi = std::min(r_hi, std::min(lo_face, hi_face));
        }
    r_hi -= std::max(2.0 * g.spacing, 0.5);

    DecayFit fit;
    if (!(r_hi > r_lo + 2.0 * g.spacing)) {
        report.decay = fit;
        return fit;  // window empty: inconclusive
    }

    const double w = g.spacing;
    const int nshell = int((r_hi - r_lo) / w) + 1;
    std::vector<double> sum_log(nshell, 0.0), sum_r(nshell, 0.0);
    std::vector<int> count(nshell, 0);
    for (int ix = 0; ix < g.dims[0]; ++ix)
        for (int iy = 0; iy < g.dims[1]; ++iy)
            for (int iz = 0; iz < g.dims[2]; ++iz) {
                double v = std::abs(u.values[g.index(ix, iy, iz)]);
                if (v <= u_floor) continue;
                Vec3 p = g.position(ix, iy, iz);
                double sigma = std::numeric_limits<double>::infinity();
                for (const auto& c : report.components)
                    sigma = std::min(sigma, norm(p - c.center));
                if (sigma < r_lo || sigma >= r_hi) continue;
                int s = int((sigma - r_lo) / w);
                sum_log[s] += std::log(v);
                sum_r[s] += sigma;
                count[s] += 1;
            }

    for (int s = 0; s < nshell; ++s) {
        if (count[s] < 4) continue;
        DecayShell sh;
        sh.r = sum_r[s] / count[s];
        sh.mean_log_u = sum_log[s] / count[s];
        sh.count = count[s];
        fit.shells.push_back(sh);
    }
    if (fit.shells.size() < 3) {
        report.decay = fit;
        return fit;
    }

    // global fit on ln(sigma u); local slopes between consecutive shells
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = int(fit.shells.size());
    for (const auto& sh : fit.shells) {
        double x = sh.r, y = sh.mean_log_u + std::log(sh.r);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    double denom = m * sxx - sx * sx;
    fit.lambda = denom != 0.0 ? -(m * sxy - sx * sy) / denom : 0.0;
    for (std::size_t i = 0; i + 1 < fit.shells.size(); ++i) {
        const auto& a = fit.shells[i];
        const auto& b = fit.shells[i + 1];
        double ya = a.mean_log_u + std::log(a.r), yb = b.mean_log_u + std::log(b.r);
        fit.shells[i].local_lambda = -(yb - ya) / (b.r - a.r);
    }
    if (fit.shells.size() >= 2)
        fit.shells.back().local_lambda = fit.shells[fit.shells.size() - 2].local_lambda;

    double lo = fit.shells.front().mean_log_u, hi = lo;
    for (const auto& sh : fit.shells) {
        lo = std::min(lo, sh.mean_log_u);
        hi = std::max(hi, sh.mean_log_u);
    }
    fit.decades = (hi - lo) / std::log(10.0);
    fit.conclusive = fit.decades >= 3.0 && fit.shells.size() >= 5;
    report.decay = fit;
    return fit;
}

enum class Theorem1Outcome { compact, split_ok, split_violation };

// compact: one component holding (1-tol) of the mass. split_ok: >= 2
// components with the localized component keeping mass >= Z - tol.
inline Theorem1Outcome theorem1_check(const SplitReport& rep, double Z, double tol) {
    if (rep.components.size() == 1 &&
        rep.components[0].mass >= (1.0 - tol) * rep.total_mass)
        return Theorem1Outcome::compact;
    if (rep.components.size() >= 2 && rep.components[0].mass >= Z - tol)
        return Theorem1Outcome::split_ok;
    return Theorem1Outcome::split_violation;
}

struct EnergyTableRow {
    double M = 0.0;
    double E = 0.0;
};

struct BindingViolation {
    double M = 0.0;
    double m = 0.0;
    double excess = 0.0;  // E_V(M) - E_V(m) - E_0(M-m)
};

// All (M, m) lattice pairs violating E_V(M) <= E_V(m) + E_0(M-m) + tol.
inline std::vector<BindingViolation> binding_check(
    const std::vector<EnergyTableRow>& tableV,
    const std::vector<EnergyTableRow>& table0, double tol) {
    std::vector<BindingViolation> out;
    auto lookup0 = [&](double M) -> const EnergyTableRow* {
        for (const auto& r : table0)
            if (std::abs(r.M - M) <= 1e-9 * std::max(1.0, std::abs(M))) return &r;
        return nullptr;
    };
    for (const auto& big : tableV)
        for (const auto& small : tableV) {
            if (!(small.M < big.M)) continue;
            const EnergyTableRow* rest = lookup0(big.M - small.M);
            if (!rest) continue;
            double excess = big.E - small.E - rest->E;
            if (excess > tol) out.push_back({big.M, small.M, excess});
        }
    return out;
}

}  // namespace tfdw

#endif
