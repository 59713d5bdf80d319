#include "blowup/problems.hpp"

#include <cmath>
#include <stdexcept>

namespace blowup::problems {

using transforms::CauchyProblem;
using transforms::GChoice;
using transforms::GKind;
using transforms::Method;

namespace {

TestProblem pole_problem(std::string id, double a, CauchyProblem p, std::optional<GChoice> g) {
    TestProblem tp{std::move(id), a, std::move(p), std::move(g), 1 / a, 1.0, 1.0, {}};
    tp.exact_y = [a](double x) { return a / (1 - a * x); };
    return tp;
}

bool is_power_family(const TestProblem& tp) { return tp.id.rfind("ypow", 0) == 0; }

} // namespace

GChoice TestProblem::nonlocal_g() const { return g ? *g : GChoice::default_for(problem.order); }

const std::vector<std::string>& problem_ids() {
    static const std::vector<std::string> ids{"ex1", "ex2-form", "ex3", "ex4-form"};
    return ids;
}

TestProblem get_problem(std::string_view id, double a) {
    if (!(a > 0) || !std::isfinite(a))
        throw std::invalid_argument("problem parameter a must be > 0");
    if (id == "ex1" || id == "ex2-form") {
        auto p = CauchyProblem::first_order(expr::parse("y^2"), 0.0, a);
        return pole_problem(std::string(id), a, std::move(p),
                            id == "ex2-form" ? std::optional(GChoice::f_over_y()) : std::nullopt);
    }
    if (id == "ex3" || id == "ex4-form") {
        auto p = CauchyProblem::second_order(expr::parse("2*y^3"), 0.0, a, a * a);
        return pole_problem(std::string(id), a, std::move(p),
                            id == "ex4-form" ? std::optional(GChoice::t_over_y()) : std::nullopt);
    }
    throw std::invalid_argument("unknown problem '" + std::string(id) + "' (ex1, ex2-form, ex3, ex4-form)");
}

TestProblem power_family(double p, double y0) {
    if (!(p > 1) || !std::isfinite(p))
        throw std::invalid_argument("power family needs p > 1");
    if (!(y0 > 0))
        throw std::invalid_argument("power family needs y0 > 0");
    const double beta = 1 / (p - 1);
    const double x_star = std::pow(y0, 1 - p) / (p - 1);
    auto f = expr::pow(expr::Expression::variable(expr::Var::y), expr::Expression::constant(p));
    TestProblem tp{"ypow", y0, CauchyProblem::first_order(f, 0.0, y0), GChoice::f_over_y(), x_star, beta,
                   std::pow(p - 1, -beta), {}};
    tp.exact_y = [p, x_star, beta](double x) { return std::pow((p - 1) * (x_star - x), -beta); };
    return tp;
}

double transform_start(const TestProblem& tp, Method m) {
    if (m == Method::nonlocal)
        return 0.0;
    const auto& p = tp.problem;
    return p.order == 1 ? p.f(p.x0, p.y0) : p.y1;
}

ode::State exact_transformed_state(const TestProblem& tp, Method m, double param) {
    const double start = transform_start(tp, m);
    if (param < start)
        throw std::invalid_argument("parameter precedes the start of the transformed system");
    const double a = tp.a;

    if (is_power_family(tp)) {
        // x* - x = y^(1-p)/(p-1)
        const double p = 1 + 1 / tp.beta;
        const double y = m == Method::differential ? std::pow(param, 1 / p) : a * std::exp(param);
        return {tp.x_star - std::pow(y, 1 - p) / (p - 1), y};
    }

    if (m == Method::differential) {
        // Both first- and second-order differential forms: x = 1/a - t^-1/2, y = sqrt(t).
        return {1 / a - 1 / std::sqrt(param), std::sqrt(param)};
    }

    if (!tp.g)
        throw std::invalid_argument("no closed-form non-local solution for " + tp.id + " (use " +
                                    (tp.problem.order == 1 ? "ex2-form" : "ex4-form") + ")");
    const double x = (1 - std::exp(-param)) / a;
    const double y = a * std::exp(param);
    if (tp.problem.order == 1)
        return {x, y};
    return {x, y, a * a * std::exp(2 * param)};
}

} // namespace blowup::problems
