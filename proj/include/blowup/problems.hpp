#pragma once

// Built-in test problems with closed-form solutions.
//
//   ex1       y' = y^2,     y(0) = a                 y = a/(1 - a x), x* = 1/a
//   ex2-form  ex1 with g = f/y for the non-local transform
//   ex3       y'' = 2 y^3,  y(0) = a, y'(0) = a^2    same solution as ex1
//   ex4-form  ex3 with g = t/y for the non-local transform
//
// plus the synthetic family y' = y^p (p > 1), which is not one of the four
// examples and exists for power-law fit coverage.

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "blowup/ode.hpp"
#include "blowup/transforms.hpp"

namespace blowup::problems {

struct TestProblem {
    std::string id;
    double a = 1.0;
    transforms::CauchyProblem problem;
    /// g used with the non-local transform; when empty, no closed-form
    /// non-local solution is available.
    std::optional<transforms::GChoice> g;
    double x_star = 0.0;
    double beta = 1.0;
    double amplitude = 1.0;  // A in y ~ A (x* - x)^-beta
    std::function<double(double)> exact_y;

    /// g for the non-local transform: the paired choice, else the order default.
    transforms::GChoice nonlocal_g() const;
};

/// Identifiers accepted by get_problem, in a stable order.
const std::vector<std::string>& problem_ids();

/// Throws std::invalid_argument for unknown ids or a <= 0.
TestProblem get_problem(std::string_view id, double a);

/// y' = y^p, y(0) = y0, g = f/y. x* = y0^(1-p)/(p-1), beta = 1/(p-1).
TestProblem power_family(double p, double y0 = 1.0);

/// Start parameter of the transformed system.
double transform_start(const TestProblem& tp, transforms::Method m);

/// Closed-form state (x, y[, t]) of the transformed system at `param`.
/// Throws std::invalid_argument when no closed form is available for the
/// method or when param precedes the start parameter.
ode::State exact_transformed_state(const TestProblem& tp, transforms::Method m, double param);

} // namespace blowup::problems
