#pragma once

// Locating the blow-up point x* from the tail of a transformed trajectory and
// fitting the local form y ~ A |x* - x|^(-beta).

#include <cstddef>
#include <optional>
#include <string_view>

#include "blowup/ode.hpp"

namespace blowup::singularity {

enum class XStarMethod { last_value, aitken };

std::string_view to_string(XStarMethod m);

struct BlowupEstimate {
    double x_star = 0.0;
    /// |x_star - last x| + |last x increment|. A diagnostic, not a confidence bound.
    double uncertainty = 0.0;
    std::optional<double> A;
    std::optional<double> beta;
    XStarMethod method = XStarMethod::last_value;
    std::size_t samples_used = 0;
};

struct XStarOptions {
    /// Tail window for the consecutive-sample Aitken pass and the monotonicity check.
    std::size_t window = 8;
    /// Per-triple Aitken values in the window must agree to this fraction of the
    /// window's x span (at least 1e3 eps|x|) for the tail to count as geometric.
    double consistency = 1e-3;
};

/// Estimates x* = lim x(param) using the "x" component of the trajectory.
///
/// Geometric tails (the non-local transforms) are extrapolated by Aitken's
/// delta-squared process over consecutive samples, exact for x_k = x* - c r^k.
/// Tails whose consecutive Aitken values drift are treated as power laws in
/// the parameter (the differential transforms, x* - x ~ t^-gamma): Aitken is
/// then applied to x interpolated at parameters p, p/q, p/q^2, which is exact
/// for such tails. Converged tails return the last value.
///
/// Throws EstimationError for fewer than 5 samples or a decreasing x tail.
BlowupEstimate estimate_x_star(const ode::Trajectory& traj, const XStarOptions& opt = {});

struct FitOptions {
    /// Fraction of samples (from the end) considered when `window` is unset.
    double tail_fraction = 0.25;
    /// When set, use every sample with x* - window < x < x*.
    std::optional<double> window;
    std::size_t min_samples = 10;
};

struct PowerLaw {
    double A = 0.0;
    double beta = 0.0;
    std::size_t samples = 0;
};

/// Least-squares line through (-ln(x* - x), ln y): slope beta, intercept ln A.
/// Samples with x* - x below 10 eps x* are dropped.
/// Throws EstimationError if x* <= max x, fewer than min_samples remain, or a
/// windowed y is not positive.
PowerLaw fit_power_law(const ode::Trajectory& traj, double x_star, const FitOptions& opt = {});

/// estimate_x_star followed by fit_power_law.
BlowupEstimate estimate_blowup(const ode::Trajectory& traj, const XStarOptions& xopt = {},
                               const FitOptions& fopt = {});

} // namespace blowup::singularity
