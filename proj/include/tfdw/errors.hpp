#ifndef TFDW_ERRORS_HPP
#define TFDW_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace tfdw {

// Base class for all library errors.
struct error : std::runtime_error {
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

// A field contains NaN/Inf values.
struct invalid_field_error : error {
    using error::error;
};

// An operation that needs nonzero mass received a (numerically) zero field.
struct degenerate_field_error : error {
    using error::error;
};

// Mismatched grids, bad padding, or otherwise inconsistent inputs.
struct config_error : error {
    using error::error;
};

// Geometric preconditions violated (support escaping the box, coincident
// configuration points, ...).
struct domain_error : error {
    using error::error;
};

// The regularization width cannot resolve a potential singularity on the grid.
struct under_resolved_error : config_error {
    using config_error::config_error;
};

// NaN/Inf produced during iteration.
struct numerical_error : error {
    using error::error;
};

// Line search could not decrease the energy within the backtracking budget.
struct step_failure_error : numerical_error {
    using numerical_error::numerical_error;
};

// Malformed tabular input (unequal spacing, too few rows, ...).
struct input_error : error {
    using error::error;
};

}  // namespace tfdw

#endif
