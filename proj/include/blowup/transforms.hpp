#pragma once

// Rewrites a blow-up Cauchy problem as an ODE system in a new independent
// variable whose solution stays bounded over the whole integration range.
//
//  differential: the parameter is t = y' (order 1: t = f(x, y)).
//  non-local:    the parameter is xi = integral of g dx from x0.
//
// In both cases x(param) increases towards the blow-up point x*.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "blowup/expr.hpp"
#include "blowup/ode.hpp"

namespace blowup::transforms {

/// A scalar function of (x, y, t): either a symbolic expression or an opaque
/// callable. Callables get central-difference partial derivatives.
class ScalarField {
public:
    using Callable = std::function<double(double x, double y, double t)>;

    ScalarField(expr::Expression e);  // NOLINT: implicit by design of call sites
    ScalarField(Callable fn, std::string label = "<callable>");

    double operator()(double x, double y, double t = 0.0) const;
    ScalarField partial(expr::Var v) const;

    const std::optional<expr::Expression>& expression() const noexcept { return expr_; }
    bool depends_on(expr::Var v) const;
    std::string to_string() const;

private:
    std::optional<expr::Expression> expr_;
    Callable fn_;
    std::string label_;
};

/// y' = f(x, y) (order 1) or y'' = f(x, y, t) with t = y' (order 2).
struct CauchyProblem {
    int order = 1;
    ScalarField f;
    double x0 = 0.0;
    double y0 = 1.0;
    double y1 = 0.0;  // y'(x0), order 2 only

    static CauchyProblem first_order(ScalarField f, double x0, double y0);
    static CauchyProblem second_order(ScalarField f, double x0, double y0, double y1);

    /// Throws std::invalid_argument when the problem is outside the methods'
    /// hypotheses (order not 1/2, order-1 f depending on t, x0 < 0, y0 <= 0).
    void validate() const;
};

enum class GKind { arc_length, f_over_y, f_over_t, t_over_y, custom };

struct GChoice {
    GKind kind = GKind::arc_length;
    double s = 2.0;  // arc_length only
    std::optional<expr::Expression> custom;

    static GChoice arc_length(double s = 2.0) { return {GKind::arc_length, s, std::nullopt}; }
    static GChoice f_over_y() { return {GKind::f_over_y, 2.0, std::nullopt}; }
    static GChoice f_over_t() { return {GKind::f_over_t, 2.0, std::nullopt}; }
    static GChoice t_over_y() { return {GKind::t_over_y, 2.0, std::nullopt}; }
    static GChoice from(expr::Expression g) { return {GKind::custom, 2.0, std::move(g)}; }

    /// arc_length(2) for order 1, t/y for order 2.
    static GChoice default_for(int order);
    /// Accepts "arc-length", "f-over-y", "f-over-t", "t-over-y"; anything else
    /// is parsed as a custom expression.
    static GChoice parse(std::string_view text, double s = 2.0);

    /// Throws std::invalid_argument when the choice does not fit the order.
    void validate(int order) const;
    std::string describe() const;
};

/// Builds g for problem p; symbolic when f is.
ScalarField make_g(const CauchyProblem& p, const GChoice& g);

enum class Method { differential, nonlocal };

std::string_view to_string(Method m);
Method parse_method(std::string_view text);

struct TransformedSystem {
    ode::OdeSystem system;
    Method method;
    int order;
    std::string parameter_name;  // "t" or "xi"
    std::size_t x_index = 0;
    std::size_t y_index = 1;
    std::optional<std::size_t> t_index;  // order-2 non-local only
};

/// A denominator d (f_x + t f_y, f or g) with |d| < kDenominatorGuard * (1 + 1),
/// i.e. relative to the numerator of x' = 1/d, raises SingularTransformError.
inline constexpr double kDenominatorGuard = 1e-14;

TransformedSystem differential_transform_1(const CauchyProblem& p);
TransformedSystem differential_transform_2(const CauchyProblem& p);
TransformedSystem nonlocal_transform_1(const CauchyProblem& p, const GChoice& g);
TransformedSystem nonlocal_transform_2(const CauchyProblem& p, const GChoice& g);

/// Dispatches on method and order.
TransformedSystem transform(const CauchyProblem& p, Method m, const GChoice& g);

// ---- admissibility of g ------------------------------------------------------

struct ProbeGrid {
    double x_span = 1.0;       // x in [x0, x0 + x_span]
    std::size_t x_points = 5;
    double y_max = 1e6;        // ladder y0, y0*ratio, ... up to y_max
    double ladder_ratio = 10.0;
    double growth_factor = 10.0;  // required g(top)/g(bottom)
};

enum class RatioTrend { bounded, diverging, vanishing, inconclusive };

std::string_view to_string(RatioTrend r);

struct AdmissibilityReport {
    bool positive = true;
    bool grows = false;
    RatioTrend ratio = RatioTrend::inconclusive;
    /// Asymptotic y-exponent of f/g when obtained by power counting.
    std::optional<double> ratio_exponent;
    bool ratio_symbolic = false;
    std::vector<std::string> probe_errors;

    /// Positive, growing, and f/g tends to a positive constant or infinity.
    bool admissible() const {
        return positive && grows && (ratio == RatioTrend::bounded || ratio == RatioTrend::diverging);
    }
};

/// Heuristic check of the conditions on g: g > 0, g -> infinity as y grows,
/// f/g -> k with k > 0 or k = infinity. For order 2 the probe follows
/// t(y) from dt/dy = f/t, the relation along actual solutions.
AdmissibilityReport check_g_admissibility(const CauchyProblem& p, const GChoice& g,
                                          const ProbeGrid& probe = {});

/// Power-counting exponent of e as y -> infinity, treating x as bounded and
/// t as y^t_exponent. nullopt when the leading behaviour is not a power of y.
std::optional<double> asymptotic_y_exponent(const expr::Expression& e, std::optional<double> t_exponent);

} // namespace blowup::transforms
