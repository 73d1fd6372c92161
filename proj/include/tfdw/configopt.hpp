#ifndef TFDW_CONFIGOPT_HPP
#define TFDW_CONFIGOPT_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "tfdw/errors.hpp"
#include "tfdw/grid.hpp"
#include "tfdw/rng.hpp"

namespace tfdw {

enum class ConfigVariant { F, F_bar };

// Point configuration for the reduced interaction energies.
// Variant F:     masses = (m0, m1, ..., mN), points = (w1, ..., wN).
// Variant F_bar: masses = (m1, m2, ..., mN), points = (w2, ..., wN);
// the first mass only sets the charge of the piece pinned at the origin.
struct Configuration {
    ConfigVariant variant = ConfigVariant::F;
    std::vector<double> masses;
    double total_charge = 1.0;  // script-Z
    double nu = 0.5;
    std::vector<Vec3> points;

    std::size_t n_points() const { return points.size(); }

    void validate() const {
        if (!(nu > 0.0 && nu < 1.0)) throw config_error("configuration: nu must lie in (0,1)");
        for (double m : masses)
            if (!(m > 0.0)) throw config_error("configuration: masses must be positive");
        if (masses.size() != points.size() + 1)
            throw config_error("configuration: need one more mass than points");
        if (points.empty()) throw config_error("configuration: no free points");
    }
};

namespace detail {

constexpr double kCoincidence = 1e-14;

// masses attached to the free points, and the coefficient of the 1/|w| term
inline double charge_coefficient(const Configuration& c) {
    return c.variant == ConfigVariant::F ? c.masses[0] - c.total_charge
                                         : c.masses[0];
}

}  // namespace detail

// F   = sum_{i<j} m_i m_j/|w_i-w_j| + (m0-Z) sum m_i/|w_i| - sum m_i/|w_i|^nu
// Fbar=             "               +  m1   sum m_i/|w_i| -      "
inline double eval_config_energy(const Configuration& c) {
    c.validate();
    const double coef = detail::charge_coefficient(c);
    const std::size_t n = c.n_points();
    double val = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double ri = norm(c.points[i]);
        if (ri < detail::kCoincidence)
            throw domain_error("configuration point at the origin");
        double mi = c.masses[i + 1];
        val += coef * mi / ri - mi / std::pow(ri, c.nu);
        for (std::size_t j = i + 1; j < n; ++j) {
            double rij = norm(c.points[i] - c.points[j]);
            if (rij < detail::kCoincidence)
                throw domain_error("coincident configuration points");
            val += mi * c.masses[j + 1] / rij;
        }
    }
    return val;
}

inline double eval_F(const Configuration& c) {
    if (c.variant != ConfigVariant::F) throw config_error("eval_F: wrong variant");
    return eval_config_energy(c);
}

inline double eval_F_bar(const Configuration& c) {
    if (c.variant != ConfigVariant::F_bar) throw config_error("eval_F_bar: wrong variant");
    return eval_config_energy(c);
}

inline std::vector<Vec3> config_gradient(const Configuration& c) {
    const double coef = detail::charge_coefficient(c);
    const std::size_t n = c.n_points();
    std::vector<Vec3> grad(n, Vec3{0, 0, 0});
    for (std::size_t i = 0; i < n; ++i) {
        double mi = c.masses[i + 1];
        double ri = norm(c.points[i]);
        if (ri < detail::kCoincidence)
            throw domain_error("configuration point at the origin");
        double r3 = ri * ri * ri;
        double cpow = c.nu * mi / std::pow(ri, c.nu + 2.0);
        for (int d = 0; d < 3; ++d)
            grad[i][d] += (-coef * mi / r3 + cpow) * c.points[i][d];
        for (std::size_t j = i + 1; j < n; ++j) {
            Vec3 diff = c.points[i] - c.points[j];
            double rij = norm(diff);
            if (rij < detail::kCoincidence)
                throw domain_error("coincident configuration points");
            double f = c.masses[i + 1] * c.masses[j + 1] / (rij * rij * rij);
            for (int d = 0; d < 3; ++d) {
                grad[i][d] -= f * diff[d];
                grad[j][d] += f * diff[d];
            }
        }
    }
    return grad;
}

enum class ConfigOptStatus { converged, diverged_to_zero, diverged_to_infinity, max_iters };

struct ConfigOptResult {
    std::vector<Vec3> points;
    double value = std::numeric_limits<double>::quiet_NaN();
    double gradient_norm = std::numeric_limits<double>::quiet_NaN();
    ConfigOptStatus status = ConfigOptStatus::max_iters;
    int starts_converged = 0;
};

namespace detail {

inline double grad_norm(const std::vector<Vec3>& g) {
    double s = 0.0;
    for (const auto& v : g) s += v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
    return std::sqrt(s);
}

struct SingleStart {
    ConfigOptStatus status = ConfigOptStatus::max_iters;
    std::vector<Vec3> points;
    double value = std::numeric_limits<double>::infinity();
    double gnorm = std::numeric_limits<double>::infinity();
};

inline SingleStart descend(Configuration c, double tol, int max_iters) {
    SingleStart out;
    double val;
    std::vector<Vec3> grad;
    try {
        val = eval_config_energy(c);
        grad = config_gradient(c);
    } catch (const domain_error&) {
        return out;
    }
    double step = 0.1;
    for (int it = 0; it < max_iters; ++it) {
        double gn = grad_norm(grad);
        double minr = std::numeric_limits<double>::infinity(),
               maxr = 0.0;
        for (const auto& w : c.points) {
            minr = std::min(minr, norm(w));
            maxr = std::max(maxr, norm(w));
        }
        if (val < -1e9 || minr < 1e-9) {
            out.status = ConfigOptStatus::diverged_to_zero;
            out.points = c.points;
            out.value = val;
            out.gnorm = gn;
            return out;
        }
        if (maxr > 1e9 && gn < tol * 1e-3) {
            out.status = ConfigOptStatus::diverged_to_infinity;
            out.points = c.points;
            out.value = val;
            out.gnorm = gn;
            return out;
        }
        if (gn <= tol) {
            out.status = ConfigOptStatus::converged;
            out.points = c.points;
            out.value = val;
            out.gnorm = gn;
            return out;
        }
        bool accepted = false;
        for (int bt = 0; bt < 60; ++bt) {
            Configuration trial = c;
            for (std::size_t i = 0; i < c.points.size(); ++i)
                for (int d = 0; d < 3; ++d)
                    trial.points[i][d] -= step * grad[i][d];
            double tval;
            try {
                tval = eval_config_energy(trial);
            } catch (const domain_error&) {
                step *= 0.5;
                continue;
            }
            if (tval < val) {
                c = std::move(trial);
                val = tval;
                grad = config_gradient(c);
                if (bt == 0) step *= 1.3;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            // line search exhausted: stationary to machine precision
            double g_now = grad_norm(grad);
            out.status = g_now <= tol ? ConfigOptStatus::converged
                                      : ConfigOptStatus::max_iters;
            out.points = c.points;
            out.value = val;
            out.gnorm = g_now;
            return out;
        }
    }
    out.points = c.points;
    out.value = val;
    out.gnorm = grad_norm(grad);
    return out;
}

}  // namespace detail

// Multi-start gradient descent over the configuration space. Random starts
// draw radii log-uniformly in [0.1, 10] * (natural scale of the N=1
// stationary radius). Any start that runs off to the origin with
// unboundedly negative values marks the degenerate regime.
inline ConfigOptResult minimize_config(const Configuration& c0, double tol = 1e-10,
                                       int restarts = 32, std::uint64_t seed = 1) {
    c0.validate();
    if (restarts < 1) throw config_error("minimize_config: restarts must be >= 1");
    const int max_iters = 200000;

    double delta = detail::charge_coefficient(c0);
    double scale = 1.0;
    if (delta > 0.0) scale = std::pow(delta / c0.nu, 1.0 / (1.0 - c0.nu));
    scale = std::max(scale, 1e-3);

    Rng rng(seed);
    ConfigOptResult best;
    bool saw_zero = false, saw_inf = false;
    for (int s = 0; s < restarts; ++s) {
        Configuration start = c0;
        if (s > 0) {
            for (auto& w : start.points) {
                double r = scale * std::pow(10.0, rng.uniform(-1.0, 1.0));
                // uniform direction
                double z = rng.uniform(-1.0, 1.0);
                double phi = rng.uniform(0.0, 2.0 * M_PI);
                double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
                w = {r * rho * std::cos(phi), r * rho * std::sin(phi), r * z};
            }
        }
        detail::SingleStart res = detail::descend(std::move(start), tol, max_iters);
        switch (res.status) {
            case ConfigOptStatus::diverged_to_zero:
                saw_zero = true;
                break;
            case ConfigOptStatus::diverged_to_infinity:
                saw_inf = true;
                break;
            case ConfigOptStatus::converged:
                best.starts_converged += 1;
                if (res.value < best.value || best.status != ConfigOptStatus::converged) {
                    best.status = ConfigOptStatus::converged;
                    best.points = res.points;
                    best.value = res.value;
                    best.gradient_norm = res.gnorm;
                }
                break;
            case ConfigOptStatus::max_iters:
                if (best.status != ConfigOptStatus::converged && res.value < best.value) {
                    best.points = res.points;
                    best.value = res.value;
                    best.gradient_norm = res.gnorm;
                }
                break;
        }
    }
    if (saw_zero) {
        // unbounded below toward the origin dominates any finite minimum
        ConfigOptResult out;
        out.status = ConfigOptStatus::diverged_to_zero;
        out.value = -std::numeric_limits<double>::infinity();
        return out;
    }
    if (best.status != ConfigOptStatus::converged && saw_inf)
        best.status = ConfigOptStatus::diverged_to_infinity;
    return best;
}

// Physical-space center predictions y^i * Z^{-1/(1-nu)}.
inline std::vector<Vec3> predicted_centers(const ConfigOptResult& result, double Z,
                                           double nu) {
    if (result.status != ConfigOptStatus::converged)
        throw config_error("predicted_centers: result did not converge");
    if (!(Z > 0.0) || !(nu > 0.0 && nu < 1.0))
        throw config_error("predicted_centers: need Z > 0 and nu in (0,1)");
    double f = std::pow(Z, -1.0 / (1.0 - nu));
    std::vector<Vec3> out;
    out.reserve(result.points.size());
    for (const auto& y : result.points) out.push_back(f * y);
    return out;
}

}  // namespace tfdw

#endif
