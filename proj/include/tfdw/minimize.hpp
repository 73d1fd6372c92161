#ifndef TFDW_MINIMIZE_HPP
#define TFDW_MINIMIZE_HPP

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "tfdw/energy.hpp"
#include "tfdw/fft.hpp"
#include "tfdw/rng.hpp"

namespace tfdw {

struct GaussianBump {
    Vec3 center{0, 0, 0};
    double width = 2.0;
    double weight = 1.0;
};

// Initial state for the flow. Deliberately off-center and multi-bump
// presets exist to probe splitting.
struct InitSpec {
    enum class Kind { gaussian, sum_of_gaussians, from_file, random_smooth };
    Kind kind = Kind::gaussian;
    std::vector<GaussianBump> bumps{GaussianBump{}};  // gaussian / sum presets
    std::string path;                                 // from_file preset

    static InitSpec gaussian(Vec3 center, double width) {
        InitSpec s;
        s.kind = Kind::gaussian;
        s.bumps = {GaussianBump{center, width, 1.0}};
        return s;
    }
    static InitSpec sum(std::vector<GaussianBump> bumps) {
        InitSpec s;
        s.kind = Kind::sum_of_gaussians;
        s.bumps = std::move(bumps);
        return s;
    }
    static InitSpec file(std::string path) {
        InitSpec s;
        s.kind = Kind::from_file;
        s.path = std::move(path);
        return s;
    }
    static InitSpec random_smooth() {
        InitSpec s;
        s.kind = Kind::random_smooth;
        return s;
    }
};

struct MinimizeConfig {
    double M = 1.0;
    double step = 1.0;           // initial line-search step
    double precond_shift = 1.0;  // c_p in (-Lap + c_p)^{-1}
    double tol_residual = 0.0;   // <= 0 means the default 1e-6 sqrt(M)
    int max_iters = 5000;
    InitSpec init;
    std::uint64_t seed = 1;
    bool keep_history = true;

    double effective_tol() const {
        return tol_residual > 0.0 ? tol_residual : 1e-6 * std::sqrt(M);
    }
    void validate() const {
        if (!(M > 0.0)) throw config_error("minimize: mass must be positive");
        if (!(precond_shift > 0.0))
            throw config_error("minimize: precond_shift must be positive");
        if (max_iters < 1) throw config_error("minimize: max_iters must be >= 1");
        if (!(step > 0.0)) throw config_error("minimize: step must be positive");
    }
};

struct IterationRecord {
    double energy;
    double residual;
};

struct MinimizeResult {
    Field field;
    EnergyBreakdown breakdown;
    double mu = 0.0;
    double residual = 0.0;
    // dilation-stationarity residual, only meaningful for V == 0 runs
    double virial = std::numeric_limits<double>::quiet_NaN();
    int iters = 0;
    bool converged = false;
    std::vector<IterationRecord> history;
};

inline Field build_init(const InitSpec& init, const GridSpec& grid,
                        std::uint64_t seed) {
    Field u(grid);
    switch (init.kind) {
        case InitSpec::Kind::gaussian:
        case InitSpec::Kind::sum_of_gaussians: {
            if (init.bumps.empty()) throw config_error("init: no bumps given");
            for (const auto& b : init.bumps) {
                if (!(b.width > 0.0))
                    throw config_error("init: bump width must be positive");
                double inv2w2 = 1.0 / (2.0 * b.width * b.width);
                for (int ix = 0; ix < grid.dims[0]; ++ix)
                    for (int iy = 0; iy < grid.dims[1]; ++iy)
                        for (int iz = 0; iz < grid.dims[2]; ++iz) {
                            Vec3 d = grid.position(ix, iy, iz) - b.center;
                            double r2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
                            u.values[grid.index(ix, iy, iz)] +=
                                b.weight * std::exp(-r2 * inv2w2);
                        }
            }
            break;
        }
        case InitSpec::Kind::from_file: {
            Field f = read_tfd1(init.path);
            if (!(f.grid == grid))
                throw config_error("init from_file: snapshot grid differs from run grid");
            u = std::move(f);
            break;
        }
        case InitSpec::Kind::random_smooth: {
            Rng rng(seed);
            for (double& v : u.values) v = rng.normal();
            DirichletPoisson smooth(grid, 1.0);
            std::vector<double> tmp;
            smooth.apply_inverse(u.values, tmp);
            smooth.apply_inverse(tmp, u.values);
            break;
        }
    }
    return u;
}

// Sobolev-preconditioned projected gradient flow on the mass sphere,
// started from an explicit field. Monotone in energy up to 1e-12 |E| per
// accepted step, renormalizes the mass after every step, and keeps the
// iterate nonnegative (folding u -> |u| never increases any energy term).
inline MinimizeResult minimize_from(const Field& V, const ModelParams& p,
                                    const MinimizeConfig& cfg,
                                    const CoulombKernel& k, const Field& init) {
    cfg.validate();
    p.validate();
    k.require_compatible(V, "minimize");
    require_same_grid(V, init, "minimize");
    const GridSpec& grid = V.grid;
    const double tol = cfg.effective_tol();
    const double M = cfg.M;

    Field u = init;
    for (double& v : u.values) v = std::abs(v);
    double m0 = mass(u);
    if (m0 <= 0.0) throw degenerate_field_error("minimize: initial state has zero mass");
    u = rescale_mass(u, M);

    DirichletPoisson precond(grid, cfg.precond_shift);
    bool v_is_zero = (max_abs(V) == 0.0);

    Field w = k.hartree_potential(u);
    EnergyBreakdown b = energy(u, V, p, k, &w);
    Field g = gradient(u, V, p, k, &w);

    MinimizeResult out;
    double step = cfg.step;
    const double step_cap = cfg.step * 64.0;
    Field r(grid), d(grid), ut(grid);
    int it = 0;
    for (; it < cfg.max_iters; ++it) {
        double mu = inner(g, u) / M;
        for (std::size_t i = 0; i < r.values.size(); ++i)
            r.values[i] = g.values[i] - mu * u.values[i];
        double res = l2_norm(r);
        if (!std::isfinite(res) || !std::isfinite(b.total))
            throw numerical_error("minimize: non-finite iterate");
        if (cfg.keep_history) out.history.push_back({b.total, res});
        if (res <= tol) {
            out.converged = true;
            break;
        }

        precond.apply_inverse(r.values, d.values);
        double proj = inner(d, u) / M;
        for (std::size_t i = 0; i < d.values.size(); ++i)
            d.values[i] -= proj * u.values[i];

        bool accepted = false;
        for (int bt = 0; bt <= 30; ++bt) {
            double s2 = 0.0;
            for (std::size_t i = 0; i < u.values.size(); ++i) {
                double v = std::abs(u.values[i] - step * d.values[i]);
                ut.values[i] = v;
                s2 += v * v;
            }
            s2 *= grid.cell_volume();
            if (!(s2 > 0.0)) {
                step *= 0.5;
                continue;
            }
            double scale = std::sqrt(M / s2);
            for (double& v : ut.values) v *= scale;
            Field wt = k.hartree_potential(ut);
            EnergyBreakdown eb = energy(ut, V, p, k, &wt);
            if (!std::isfinite(eb.total))
                throw numerical_error("minimize: non-finite trial energy");
            if (eb.total <= b.total + 1e-12 * std::abs(b.total)) {
                std::swap(u, ut);
                w = std::move(wt);
                b = eb;
                if (bt == 0) step = std::min(step * 1.25, step_cap);
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted)
            throw step_failure_error(
                "minimize: line search failed to decrease the energy after 30 backtracks");
        g = gradient(u, V, p, k, &w);
    }

    double mu = inner(g, u) / M;
    for (std::size_t i = 0; i < r.values.size(); ++i)
        r.values[i] = g.values[i] - mu * u.values[i];
    out.residual = l2_norm(r);
    out.mu = mu;
    out.breakdown = b;
    if (v_is_zero) out.virial = virial_residual(b);
    out.iters = it;
    out.field = std::move(u);
    if (out.residual <= tol) out.converged = true;
    return out;
}

inline MinimizeResult minimize(const Field& V, const ModelParams& p,
                               const MinimizeConfig& cfg, const CoulombKernel& k) {
    cfg.validate();
    return minimize_from(V, p, cfg, k, build_init(cfg.init, V.grid, cfg.seed));
}

struct MassScanRow {
    double M = 0.0;
    std::optional<MinimizeResult> result;
    std::string error;  // nonempty if the row failed
};

// One converged row per mass, warm-started from the previous row's field.
inline std::vector<MassScanRow> mass_scan(const Field& V, const ModelParams& p,
                                          const std::vector<double>& masses,
                                          const MinimizeConfig& cfg,
                                          const CoulombKernel& k) {
    if (masses.empty()) return {};
    for (std::size_t i = 1; i < masses.size(); ++i)
        if (!(masses[i] > masses[i - 1]))
            throw config_error("mass_scan: masses must be strictly increasing");
    std::vector<MassScanRow> rows;
    Field warm_field;
    bool have_warm = false;
    for (double M : masses) {
        MassScanRow row;
        row.M = M;
        MinimizeConfig c = cfg;
        c.M = M;
        try {
            row.result = have_warm
                             ? minimize_from(V, p, c, k, warm_field)
                             : minimize(V, p, c, k);
            if (row.result->converged) {
                warm_field = row.result->field;
                have_warm = true;
            }
        } catch (const error& e) {
            row.error = e.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace tfdw

#endif
