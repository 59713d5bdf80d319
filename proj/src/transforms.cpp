#include "blowup/transforms.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "blowup/errors.hpp"

namespace blowup::transforms {

using expr::Expression;
using expr::Var;

// ---- ScalarField -------------------------------------------------------------

ScalarField::ScalarField(Expression e) : expr_(std::move(e)) {}

ScalarField::ScalarField(Callable fn, std::string label) : fn_(std::move(fn)), label_(std::move(label)) {
    if (!fn_)
        throw std::invalid_argument("ScalarField: empty callable");
}

double ScalarField::operator()(double x, double y, double t) const {
    if (expr_)
        return expr::evaluate(*expr_, expr::Bindings(x, y, t));
    const double r = fn_(x, y, t);
    if (!std::isfinite(r))
        throw expr::EvalError(expr::EvalError::Kind::non_finite, "non-finite value of " + label_);
    return r;
}

ScalarField ScalarField::partial(Var v) const {
    if (expr_)
        return ScalarField(expr::differentiate(*expr_, v));
    const Callable fn = fn_;
    const std::string label = "d(" + label_ + ")/d" + expr::name_of(v);
    return ScalarField(
        [fn, v](double x, double y, double t) {
            double args[3] = {x, y, t};
            const std::size_t i = static_cast<std::size_t>(v);
            const double h = std::cbrt(std::numeric_limits<double>::epsilon()) * std::max(1.0, std::fabs(args[i]));
            const double centre = args[i];
            args[i] = centre + h;
            const double up = fn(args[0], args[1], args[2]);
            args[i] = centre - h;
            const double down = fn(args[0], args[1], args[2]);
            return (up - down) / (2 * h);
        },
        label);
}

bool ScalarField::depends_on(Var v) const {
    // Callables are opaque; assume they may depend on anything.
    return expr_ ? expr::depends_on(*expr_, v) : true;
}

std::string ScalarField::to_string() const { return expr_ ? expr::to_string(*expr_) : label_; }

// ---- CauchyProblem -------------------------------------------------------------

CauchyProblem CauchyProblem::first_order(ScalarField f, double x0, double y0) {
    CauchyProblem p{1, std::move(f), x0, y0, 0.0};
    p.validate();
    return p;
}

CauchyProblem CauchyProblem::second_order(ScalarField f, double x0, double y0, double y1) {
    CauchyProblem p{2, std::move(f), x0, y0, y1};
    p.validate();
    return p;
}

void CauchyProblem::validate() const {
    if (order != 1 && order != 2)
        throw std::invalid_argument("CauchyProblem: only orders 1 and 2 are supported");
    if (!std::isfinite(x0) || !std::isfinite(y0) || !std::isfinite(y1))
        throw std::invalid_argument("CauchyProblem: initial data must be finite");
    if (order == 1) {
        if (f.expression() && f.depends_on(Var::t))
            throw std::invalid_argument("CauchyProblem: a first-order right-hand side cannot depend on t");
        if (x0 < 0)
            throw std::invalid_argument("CauchyProblem: x0 must be >= 0");
        if (y0 <= 0)
            throw std::invalid_argument("CauchyProblem: y0 must be > 0");
    }
}

// ---- GChoice -------------------------------------------------------------------

GChoice GChoice::default_for(int order) { return order == 2 ? t_over_y() : arc_length(2.0); }

GChoice GChoice::parse(std::string_view text, double s) {
    if (text == "arc-length")
        return arc_length(s);
    if (text == "f-over-y")
        return f_over_y();
    if (text == "f-over-t")
        return f_over_t();
    if (text == "t-over-y")
        return t_over_y();
    return from(expr::parse(text));
}

void GChoice::validate(int order) const {
    switch (kind) {
    case GKind::arc_length:
        if (!(s > 0) || !std::isfinite(s))
            throw std::invalid_argument("arc-length g needs s > 0");
        break;
    case GKind::f_over_y: break;
    case GKind::f_over_t:
    case GKind::t_over_y:
        if (order != 2)
            throw std::invalid_argument("g = " + describe() + " needs t = y' and is only valid for order 2");
        break;
    case GKind::custom:
        if (!custom)
            throw std::invalid_argument("custom g without an expression");
        if (order == 1 && expr::depends_on(*custom, Var::t))
            throw std::invalid_argument("custom g for a first-order problem cannot depend on t");
        break;
    }
}

std::string GChoice::describe() const {
    switch (kind) {
    case GKind::arc_length: {
        std::ostringstream os;
        os << "arc-length(s=" << s << ")";
        return os.str();
    }
    case GKind::f_over_y: return "f/y";
    case GKind::f_over_t: return "f/t";
    case GKind::t_over_y: return "t/y";
    case GKind::custom: return custom ? expr::to_string(*custom) : "<custom>";
    }
    return "?";
}

ScalarField make_g(const CauchyProblem& p, const GChoice& g) {
    g.validate(p.order);
    const Expression X = Expression::variable(Var::x);
    const Expression Y = Expression::variable(Var::y);
    const Expression T = Expression::variable(Var::t);
    const auto num = [](double v) { return Expression::constant(v); };

    if (g.kind == GKind::custom)
        return ScalarField(*g.custom);
    if (g.kind == GKind::t_over_y)
        return ScalarField(T / Y);

    if (const auto& f = p.f.expression()) {
        switch (g.kind) {
        case GKind::arc_length: {
            Expression sum = num(1) + expr::pow(expr::apply(expr::Op::abs, *f), num(g.s));
            if (p.order == 2)
                sum = num(1) + expr::pow(expr::apply(expr::Op::abs, T), num(g.s)) +
                      expr::pow(expr::apply(expr::Op::abs, *f), num(g.s));
            return ScalarField(expr::pow(sum, num(1.0 / g.s)));
        }
        case GKind::f_over_y: return ScalarField(*f / Y);
        case GKind::f_over_t: return ScalarField(*f / T);
        default: break;
        }
    }

    const ScalarField f = p.f;
    const int order = p.order;
    switch (g.kind) {
    case GKind::arc_length: {
        const double s = g.s;
        return ScalarField(
            [f, s, order](double x, double y, double t) {
                double sum = 1 + std::pow(std::fabs(f(x, y, t)), s);
                if (order == 2)
                    sum += std::pow(std::fabs(t), s);
                return std::pow(sum, 1 / s);
            },
            g.describe());
    }
    case GKind::f_over_y:
        return ScalarField([f](double x, double y, double t) { return f(x, y, t) / y; }, "f/y");
    case GKind::f_over_t:
        return ScalarField([f](double x, double y, double t) { return f(x, y, t) / t; }, "f/t");
    default: break;
    }
    throw std::logic_error("make_g: unhandled g kind");
}

// ---- transforms ------------------------------------------------------------------

std::string_view to_string(Method m) { return m == Method::differential ? "differential" : "nonlocal"; }

Method parse_method(std::string_view text) {
    if (text == "differential")
        return Method::differential;
    if (text == "nonlocal" || text == "non-local")
        return Method::nonlocal;
    throw std::invalid_argument("unknown method '" + std::string(text) + "' (differential | nonlocal)");
}

namespace {

// Measured against the x equation x' = 1/den. Large numerators elsewhere (t' = f/g
// grows like y^2 in the second-order examples) are growth, not singularity.
void guard(double den, const char* what, const char* param_name, double param, double x, double y) {
    if (std::fabs(den) < kDenominatorGuard * (1 + 1)) {
        std::ostringstream os;
        os.precision(17);
        os << "singular transform: " << what << " = " << den << " at (" << param_name << "=" << param
           << ", x=" << x << ", y=" << y << ")";
        throw SingularTransformError(os.str());
    }
}

void require_order(const CauchyProblem& p, int order, const char* who) {
    p.validate();
    if (p.order != order)
        throw std::invalid_argument(std::string(who) + ": problem has order " + std::to_string(p.order) +
                                    ", expected " + std::to_string(order));
}

} // namespace

TransformedSystem differential_transform_1(const CauchyProblem& p) {
    require_order(p, 1, "differential_transform_1");
    const ScalarField f = p.f;
    const ScalarField fx = f.partial(Var::x);
    const ScalarField fy = f.partial(Var::y);
    const double t0 = f(p.x0, p.y0);

    auto rhs = [fx, fy](double t, std::span<const double> s, std::span<double> d) {
        const double x = s[0], y = s[1];
        const double den = fx(x, y) + t * fy(x, y);
        guard(den, "f_x + t*f_y", "t", t, x, y);
        d[0] = 1 / den;
        d[1] = t / den;
    };
    return {ode::OdeSystem({"x", "y"}, rhs, t0, {p.x0, p.y0}), Method::differential, 1, "t", 0, 1, std::nullopt};
}

TransformedSystem differential_transform_2(const CauchyProblem& p) {
    require_order(p, 2, "differential_transform_2");
    const ScalarField f = p.f;
    auto rhs = [f](double t, std::span<const double> s, std::span<double> d) {
        const double x = s[0], y = s[1];
        const double fv = f(x, y, t);
        guard(fv, "f", "t", t, x, y);
        d[0] = 1 / fv;
        d[1] = t / fv;
    };
    return {ode::OdeSystem({"x", "y"}, rhs, p.y1, {p.x0, p.y0}), Method::differential, 2, "t", 0, 1, std::nullopt};
}

TransformedSystem nonlocal_transform_1(const CauchyProblem& p, const GChoice& choice) {
    require_order(p, 1, "nonlocal_transform_1");
    const ScalarField f = p.f;
    const ScalarField g = make_g(p, choice);
    auto rhs = [f, g](double xi, std::span<const double> s, std::span<double> d) {
        const double x = s[0], y = s[1];
        const double fv = f(x, y);
        const double gv = g(x, y);
        guard(gv, "g", "xi", xi, x, y);
        d[0] = 1 / gv;
        d[1] = fv / gv;
    };
    return {ode::OdeSystem({"x", "y"}, rhs, 0.0, {p.x0, p.y0}), Method::nonlocal, 1, "xi", 0, 1, std::nullopt};
}

TransformedSystem nonlocal_transform_2(const CauchyProblem& p, const GChoice& choice) {
    require_order(p, 2, "nonlocal_transform_2");
    const ScalarField f = p.f;
    const ScalarField g = make_g(p, choice);
    auto rhs = [f, g](double xi, std::span<const double> s, std::span<double> d) {
        const double x = s[0], y = s[1], t = s[2];
        const double fv = f(x, y, t);
        const double gv = g(x, y, t);
        guard(gv, "g", "xi", xi, x, y);
        d[0] = 1 / gv;
        d[1] = t / gv;
        d[2] = fv / gv;
    };
    return {ode::OdeSystem({"x", "y", "t"}, rhs, 0.0, {p.x0, p.y0, p.y1}), Method::nonlocal, 2, "xi", 0, 1,
            std::size_t{2}};
}

TransformedSystem transform(const CauchyProblem& p, Method m, const GChoice& g) {
    if (m == Method::differential)
        return p.order == 1 ? differential_transform_1(p) : differential_transform_2(p);
    return p.order == 1 ? nonlocal_transform_1(p, g) : nonlocal_transform_2(p, g);
}

} // namespace blowup::transforms
