#include "blowup/ode.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "blowup/errors.hpp"

namespace blowup::ode {

OdeSystem::OdeSystem(std::vector<std::string> names, RhsFunction rhs, double start, State initial)
    : names_(std::move(names)), rhs_(std::move(rhs)), start_(start), initial_(std::move(initial)) {
    if (names_.empty())
        throw std::invalid_argument("OdeSystem: empty system");
    if (initial_.size() != names_.size())
        throw std::invalid_argument("OdeSystem: initial state length does not match dimension");
    if (std::set<std::string>(names_.begin(), names_.end()).size() != names_.size())
        throw std::invalid_argument("OdeSystem: component names must be unique");
    if (!rhs_)
        throw std::invalid_argument("OdeSystem: missing right-hand side");
}

std::size_t OdeSystem::index_of(std::string_view name) const {
    auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end())
        throw std::out_of_range("no component named '" + std::string(name) + "'");
    return static_cast<std::size_t>(it - names_.begin());
}

void StopRule::validate() const {
    if (max_steps == 0 && !std::isfinite(max_parameter))
        throw std::invalid_argument("StopRule: need a step budget or a finite parameter bound");
    if (!(decay_threshold >= 0))
        throw std::invalid_argument("StopRule: decay threshold must be >= 0");
}

std::string_view to_string(Termination t) {
    switch (t) {
    case Termination::step_budget: return "step-budget";
    case Termination::parameter_bound: return "parameter-bound";
    case Termination::derivative_decay: return "derivative-decay";
    case Termination::rhs_error: return "rhs-error";
    }
    return "unknown";
}

std::size_t Trajectory::index_of(std::string_view name) const {
    auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end())
        throw std::out_of_range("no component named '" + std::string(name) + "'");
    return static_cast<std::size_t>(it - names_.begin());
}

std::vector<double> Trajectory::column(std::string_view name) const {
    const std::size_t k = index_of(name);
    std::vector<double> out(size());
    for (std::size_t i = 0; i < size(); ++i)
        out[i] = states_[i * dimension() + k];
    return out;
}

void Trajectory::push(double param, std::span<const double> state) {
    if (state.size() != dimension())
        throw std::invalid_argument("Trajectory::push: state has wrong dimension");
    params_.push_back(param);
    states_.insert(states_.end(), state.begin(), state.end());
}

namespace {

// Stage buffers reused across steps.
struct Rk4Work {
    explicit Rk4Work(std::size_t n) : k1(n), k2(n), k3(n), k4(n), tmp(n) {}
    State k1, k2, k3, k4, tmp;
};

// Completes a step whose first stage k1 = F(p, y) is already in `w.k1`.
void finish_step(const OdeSystem& sys, double p, std::span<const double> y, double h, Rk4Work& w,
                 std::span<double> out) {
    const std::size_t n = y.size();
    const double half = 0.5 * h;
    for (std::size_t i = 0; i < n; ++i)
        w.tmp[i] = y[i] + half * w.k1[i];
    sys.eval(p + half, w.tmp, w.k2);
    for (std::size_t i = 0; i < n; ++i)
        w.tmp[i] = y[i] + half * w.k2[i];
    sys.eval(p + half, w.tmp, w.k3);
    for (std::size_t i = 0; i < n; ++i)
        w.tmp[i] = y[i] + h * w.k3[i];
    sys.eval(p + h, w.tmp, w.k4);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = y[i] + h / 6.0 * (w.k1[i] + 2.0 * w.k2[i] + 2.0 * w.k3[i] + w.k4[i]);
}

bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double a) { return std::isfinite(a); });
}

} // namespace

State rk4_step(const OdeSystem& sys, double param, std::span<const double> state, double h) {
    if (!(h > 0))
        throw std::invalid_argument("rk4_step: step must be positive");
    if (state.size() != sys.dimension())
        throw std::invalid_argument("rk4_step: state has wrong dimension");
    if (!all_finite(state))
        throw std::invalid_argument("rk4_step: state is not finite");
    Rk4Work w(state.size());
    sys.eval(param, state, w.k1);
    State out(state.size());
    finish_step(sys, param, state, h, w, out);
    return out;
}

Trajectory integrate(const OdeSystem& sys, double h, const StopRule& stop) {
    if (!(h > 0))
        throw std::invalid_argument("integrate: step must be positive");
    stop.validate();
    if (stop.decay_component >= sys.dimension())
        throw std::invalid_argument("integrate: decay component out of range");

    const std::size_t n = sys.dimension();
    Trajectory traj(sys.names());
    State y = sys.initial_state();
    State next(n);
    Rk4Work w(n);
    const double start = sys.start();
    // Absorbs rounding in start + k*h when the bound is a whole number of steps.
    const double slack = 1e-9 * h;

    traj.push(start, y);
    for (std::size_t k = 0;; ++k) {
        if (k >= stop.max_steps) {
            traj.reason = Termination::step_budget;
            break;
        }
        const double p = start + static_cast<double>(k) * h;
        const double p_next = start + static_cast<double>(k + 1) * h;
        if (p_next > stop.max_parameter + slack) {
            traj.reason = Termination::parameter_bound;
            break;
        }
        try {
            sys.eval(p, y, w.k1);
            if (std::fabs(w.k1[stop.decay_component]) < stop.decay_threshold) {
                traj.reason = Termination::derivative_decay;
                break;
            }
            finish_step(sys, p, y, h, w, next);
        } catch (const Error& e) {
            if (k == 0)
                throw;
            traj.reason = Termination::rhs_error;
            traj.message = e.what();
            break;
        }
        if (!all_finite(next)) {
            if (k == 0)
                throw Error("integrate: first step produced a non-finite state");
            traj.reason = Termination::rhs_error;
            traj.message = "non-finite state at parameter " + std::to_string(p_next);
            break;
        }
        y.swap(next);
        traj.push(p_next, y);
    }
    return traj;
}

} // namespace blowup::ode
