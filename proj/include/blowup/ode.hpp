#pragma once

// Fixed-step classical RK4 for small first-order systems.

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace blowup::ode {

using State = std::vector<double>;

/// deriv = F(param, state). May throw blowup::Error (e.g. a singular transform).
using RhsFunction = std::function<void(double param, std::span<const double> state, std::span<double> deriv)>;

class OdeSystem {
public:
    OdeSystem(std::vector<std::string> names, RhsFunction rhs, double start, State initial);

    std::size_t dimension() const noexcept { return names_.size(); }
    const std::vector<std::string>& names() const noexcept { return names_; }
    double start() const noexcept { return start_; }
    const State& initial_state() const noexcept { return initial_; }

    /// Index of the component called `name`; throws std::out_of_range.
    std::size_t index_of(std::string_view name) const;

    void eval(double param, std::span<const double> state, std::span<double> deriv) const {
        rhs_(param, state, deriv);
    }

private:
    std::vector<std::string> names_;
    RhsFunction rhs_;
    double start_;
    State initial_;
};

struct StopRule {
    std::size_t max_steps = 10'000'000;
    double max_parameter = std::numeric_limits<double>::infinity();
    /// Stop once |d(component)/d(param)| drops below this; 0 disables.
    double decay_threshold = 1e-8;
    /// Component the decay test watches (x for every transformed system).
    std::size_t decay_component = 0;

    /// Throws std::invalid_argument if no bound is finite or the threshold is negative.
    void validate() const;
};

enum class Termination { step_budget, parameter_bound, derivative_decay, rhs_error };

std::string_view to_string(Termination t);

/// Samples (param, state) of an integration run, stored densely.
class Trajectory {
public:
    explicit Trajectory(std::vector<std::string> names) : names_(std::move(names)) {}

    std::size_t size() const noexcept { return params_.size(); }
    std::size_t dimension() const noexcept { return names_.size(); }
    const std::vector<std::string>& names() const noexcept { return names_; }

    double param(std::size_t i) const { return params_[i]; }
    std::span<const double> state(std::size_t i) const {
        return {states_.data() + i * dimension(), dimension()};
    }
    const std::vector<double>& params() const noexcept { return params_; }

    /// Copy of one component across all samples; throws std::out_of_range.
    std::vector<double> column(std::string_view name) const;
    std::size_t index_of(std::string_view name) const;

    void push(double param, std::span<const double> state);

    Termination reason = Termination::step_budget;
    /// Diagnostic for rhs_error terminations.
    std::string message;

private:
    std::vector<std::string> names_;
    std::vector<double> params_;
    std::vector<double> states_;
};

/// One classical RK4 step (weights 1/6, 1/3, 1/3, 1/6).
State rk4_step(const OdeSystem& sys, double param, std::span<const double> state, double h);

/// Runs RK4 from the system's start until a stop rule fires. The sample at
/// step k has parameter start + k*h. A right-hand-side failure before the
/// first step is rethrown; later failures end the run with reason rhs_error.
Trajectory integrate(const OdeSystem& sys, double h, const StopRule& stop);

} // namespace blowup::ode
