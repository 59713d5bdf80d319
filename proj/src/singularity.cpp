#include "blowup/singularity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "blowup/errors.hpp"

namespace blowup::singularity {

namespace {

constexpr double eps = std::numeric_limits<double>::epsilon();

struct AitkenResult {
    double value;
    bool ok;
};

// Limit of a, b, c assuming geometric convergence.
AitkenResult aitken(double a, double b, double c) {
    const double d1 = b - a;
    const double d2 = c - b;
    const double den = d2 - d1;
    const double scale = std::max({std::fabs(a), std::fabs(b), std::fabs(c), 1e-300});
    if (std::fabs(den) <= 16 * eps * scale)
        return {c, false};
    const double r = c - d2 * d2 / den;
    return {r, std::isfinite(r)};
}

// Linear interpolation of x at parameter p (params strictly increasing).
double interpolate(const std::vector<double>& params, const std::vector<double>& xs, double p) {
    auto it = std::lower_bound(params.begin(), params.end(), p);
    if (it == params.begin())
        return xs.front();
    if (it == params.end())
        return xs.back();
    const std::size_t k = static_cast<std::size_t>(it - params.begin());
    if (params[k] == p)
        return xs[k];
    const double w = (p - params[k - 1]) / (params[k] - params[k - 1]);
    return xs[k - 1] + w * (xs[k] - xs[k - 1]);
}

} // namespace

std::string_view to_string(XStarMethod m) { return m == XStarMethod::aitken ? "aitken" : "last-value"; }

BlowupEstimate estimate_x_star(const ode::Trajectory& traj, const XStarOptions& opt) {
    const std::size_t n = traj.size();
    if (n < 5)
        throw EstimationError("x* estimation needs at least 5 samples, got " + std::to_string(n));
    const std::vector<double> xs = traj.column("x");
    const std::vector<double>& ps = traj.params();

    const std::size_t m = std::clamp<std::size_t>(opt.window, 3, n);
    const std::size_t first = n - m;
    for (std::size_t i = first + 1; i < n; ++i)
        if (xs[i] < xs[i - 1])
            throw EstimationError("x is not monotone in the trajectory tail");

    const double last = xs[n - 1];
    const double last_inc = xs[n - 1] - xs[n - 2];
    BlowupEstimate est;
    est.x_star = last;
    est.uncertainty = std::fabs(last_inc);
    est.samples_used = 1;

    auto accept = [&](double value, std::size_t used) {
        est.x_star = value;
        est.uncertainty = std::fabs(value - last) + std::fabs(last_inc);
        est.method = XStarMethod::aitken;
        est.samples_used = used;
    };

    // Converged to rounding: nothing to extrapolate.
    if (std::fabs(last_inc) <= 4 * eps * std::max(std::fabs(last), 1e-300))
        return est;

    // Consecutive triples over the window.
    {
        bool ok = true;
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (std::size_t i = first; i + 2 < n && ok; ++i) {
            const auto a = aitken(xs[i], xs[i + 1], xs[i + 2]);
            ok = a.ok;
            lo = std::min(lo, a.value);
            hi = std::max(hi, a.value);
        }
        const double span = xs[n - 1] - xs[first];
        // Rounding in x limits how closely the triples can agree.
        const double tol = std::max(opt.consistency * span, 1e3 * eps * std::fabs(last));
        if (ok && hi - lo <= tol) {
            accept(aitken(xs[n - 3], xs[n - 2], xs[n - 1]).value, 3);
            return est;
        }
        // Second differences lost in rounding while increments still shrink
        // geometrically: the remaining distance is of the order of rounding.
        if (!ok && std::fabs(last_inc) <= 0.9 * std::fabs(xs[first + 1] - xs[first]))
            return est;
    }

    // Power law in the parameter: samples at p, p/q, p/q^2.
    const double p_last = ps[n - 1];
    const double p_first = ps.front();
    if (p_first >= 0 && p_last > p_first) {
        const double q = p_first > 0 ? std::min(2.0, std::sqrt(p_last / p_first)) : 2.0;
        if (q > 1) {
            const double x_mid = interpolate(ps, xs, p_last / q);
            const double x_old = interpolate(ps, xs, p_last / (q * q));
            const auto a = aitken(x_old, x_mid, last);
            if (a.ok && a.value >= last) {
                accept(a.value, 3);
                return est;
            }
        }
    }
    return est;
}

PowerLaw fit_power_law(const ode::Trajectory& traj, double x_star, const FitOptions& opt) {
    const std::vector<double> xs = traj.column("x");
    const std::vector<double> ys = traj.column("y");
    if (xs.empty())
        throw EstimationError("power-law fit on an empty trajectory");
    if (x_star <= *std::max_element(xs.begin(), xs.end()))
        throw EstimationError("power-law fit needs x* beyond every sampled x");

    std::size_t begin = 0;
    if (!opt.window) {
        const double frac = std::clamp(opt.tail_fraction, 0.0, 1.0);
        begin = xs.size() - static_cast<std::size_t>(std::ceil(frac * static_cast<double>(xs.size())));
    }
    const double floor_gap = 10 * eps * std::fabs(x_star);

    // ln y = ln A + beta * u with u = -ln(x* - x).
    std::vector<double> us, vs;
    for (std::size_t i = begin; i < xs.size(); ++i) {
        const double gap = x_star - xs[i];
        if (opt.window && gap >= *opt.window)
            continue;
        if (gap < floor_gap)
            continue;
        if (!(ys[i] > 0))
            throw EstimationError("power-law fit needs y > 0 in the window");
        us.push_back(-std::log(gap));
        vs.push_back(std::log(ys[i]));
    }
    const std::size_t count = us.size();
    if (count < opt.min_samples)
        throw EstimationError("power-law fit window holds " + std::to_string(count) + " samples, need " +
                              std::to_string(opt.min_samples));
    const double nn = static_cast<double>(count);
    double u_mean = 0, v_mean = 0;
    for (std::size_t i = 0; i < count; ++i) {
        u_mean += us[i];
        v_mean += vs[i];
    }
    u_mean /= nn;
    v_mean /= nn;
    double suu = 0, suv = 0;
    for (std::size_t i = 0; i < count; ++i) {
        suu += (us[i] - u_mean) * (us[i] - u_mean);
        suv += (us[i] - u_mean) * (vs[i] - v_mean);
    }
    if (!(suu > 0))
        throw EstimationError("power-law fit window has no spread in x");
    PowerLaw fit;
    fit.beta = suv / suu;
    fit.A = std::exp(v_mean - fit.beta * u_mean);
    fit.samples = count;
    return fit;
}

BlowupEstimate estimate_blowup(const ode::Trajectory& traj, const XStarOptions& xopt, const FitOptions& fopt) {
    BlowupEstimate est = estimate_x_star(traj, xopt);
    const PowerLaw fit = fit_power_law(traj, est.x_star, fopt);
    est.A = fit.A;
    est.beta = fit.beta;
    return est;
}

} // namespace blowup::singularity
