#include <cmath>
#include <sstream>

#include "blowup/transforms.hpp"

namespace blowup::transforms {

using expr::Expression;
using expr::Op;
using expr::Var;

std::string_view to_string(RatioTrend r) {
    switch (r) {
    case RatioTrend::bounded: return "bounded";
    case RatioTrend::diverging: return "diverging";
    case RatioTrend::vanishing: return "vanishing";
    case RatioTrend::inconclusive: return "inconclusive";
    }
    return "?";
}

std::optional<double> asymptotic_y_exponent(const Expression& e, std::optional<double> t_exponent) {
    using R = std::optional<double>;
    const auto rec = [&](const Expression& s) { return asymptotic_y_exponent(s, t_exponent); };
    switch (e.op()) {
    case Op::constant: return e.value() != 0 ? R(0.0) : std::nullopt;
    case Op::variable:
        switch (e.var()) {
        case Var::x: return 0.0;
        case Var::y: return 1.0;
        case Var::t: return t_exponent;
        }
        return std::nullopt;
    case Op::neg:
    case Op::abs: return rec(e.lhs());
    case Op::sign: return 0.0;
    case Op::sqrt: {
        const R a = rec(e.lhs());
        return a ? R(*a / 2) : std::nullopt;
    }
    case Op::exp:
    case Op::ln: {
        // Bounded argument keeps the value bounded; otherwise not a power law.
        const R a = rec(e.lhs());
        return a && *a == 0 ? R(0.0) : std::nullopt;
    }
    default: break;
    }
    const R a = rec(e.lhs());
    const R b = rec(e.rhs());
    switch (e.op()) {
    case Op::add:
        if (!a || !b)
            return std::nullopt;
        return std::max(*a, *b);
    case Op::sub:
        // Equal leading powers may cancel.
        if (!a || !b || *a == *b)
            return std::nullopt;
        return std::max(*a, *b);
    case Op::mul:
        if (!a || !b)
            return std::nullopt;
        return *a + *b;
    case Op::div:
        if (!a || !b)
            return std::nullopt;
        return *a - *b;
    case Op::pow:
        if (a && e.rhs().op() == Op::constant)
            return *a * e.rhs().value();
        if (a && b && *a == 0 && *b == 0)
            return 0.0;
        return std::nullopt;
    default: break;
    }
    return std::nullopt;
}

namespace {

// t^2 along a solution satisfies d(t^2)/dy = 2 f(x, y, t); integrate in ln y.
double advance_t_squared(const ScalarField& f, double x, double y_from, double y_to, double tsq) {
    constexpr int substeps = 16;
    const double s0 = std::log(y_from);
    const double h = (std::log(y_to) - s0) / substeps;
    auto rate = [&](double s, double T) {
        const double y = std::exp(s);
        return 2 * y * f(x, y, std::sqrt(std::max(T, 0.0)));
    };
    for (int i = 0; i < substeps; ++i) {
        const double s = s0 + i * h;
        const double k1 = rate(s, tsq);
        const double k2 = rate(s + h / 2, tsq + h / 2 * k1);
        const double k3 = rate(s + h / 2, tsq + h / 2 * k2);
        const double k4 = rate(s + h, tsq + h * k3);
        tsq += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    if (!std::isfinite(tsq))
        throw expr::EvalError(expr::EvalError::Kind::non_finite, "t^2 overflowed along the probe ladder");
    return tsq;
}

RatioTrend classify_exponent(double e) {
    constexpr double tol = 1e-9;
    if (e > tol)
        return RatioTrend::diverging;
    if (e < -tol)
        return RatioTrend::vanishing;
    return RatioTrend::bounded;
}

} // namespace

AdmissibilityReport check_g_admissibility(const CauchyProblem& p, const GChoice& choice, const ProbeGrid& probe) {
    AdmissibilityReport report;
    const ScalarField g = make_g(p, choice);
    const ScalarField& f = p.f;

    const double base = p.y0 > 0 ? p.y0 : 1.0;
    std::vector<double> ladder;
    for (double y = base; y <= probe.y_max * (1 + 1e-12); y *= probe.ladder_ratio)
        ladder.push_back(y);

    const std::size_t nx = std::max<std::size_t>(probe.x_points, 1);
    std::vector<double> g_row, ratio_row;  // along the ladder at x = x0

    for (std::size_t ix = 0; ix < nx; ++ix) {
        const double x = nx == 1 ? p.x0 : p.x0 + probe.x_span * static_cast<double>(ix) / static_cast<double>(nx - 1);
        double tsq = p.y1 * p.y1;
        for (std::size_t j = 0; j < ladder.size(); ++j) {
            const double y = ladder[j];
            try {
                if (p.order == 2 && j > 0)
                    tsq = advance_t_squared(f, x, ladder[j - 1], y, tsq);
                const double t = p.order == 2 ? std::sqrt(tsq) : 0.0;
                const double gv = g(x, y, t);
                if (!(gv > 0))
                    report.positive = false;
                if (ix == 0) {
                    g_row.push_back(gv);
                    ratio_row.push_back(f(x, y, t) / gv);
                }
            } catch (const Error& e) {
                std::ostringstream os;
                os << "x=" << x << ", y=" << y << ": " << e.what();
                report.probe_errors.push_back(os.str());
                if (p.order == 2)
                    break;  // the t ladder cannot continue past a failure
            }
        }
    }

    if (g_row.size() == ladder.size() && g_row.size() >= 2)
        report.grows = g_row.back() >= probe.growth_factor * g_row.front();

    // Symbolic power counting when both f and g are expressions.
    if (f.expression() && g.expression()) {
        std::optional<double> t_exp;
        if (p.order == 2 && !f.depends_on(Var::t)) {
            if (auto m = asymptotic_y_exponent(*f.expression(), std::nullopt); m && *m > -1)
                t_exp = (*m + 1) / 2;
        }
        const auto ef = asymptotic_y_exponent(*f.expression(), t_exp);
        const auto eg = asymptotic_y_exponent(*g.expression(), t_exp);
        if (ef && eg) {
            report.ratio_exponent = *ef - *eg;
            report.ratio_symbolic = true;
            report.ratio = classify_exponent(*report.ratio_exponent);
            return report;
        }
    }

    // Numeric trend of f/g over the top of the ladder.
    if (ratio_row.size() == ladder.size() && ratio_row.size() >= 3) {
        const std::size_t n = ratio_row.size();
        const double r0 = ratio_row[n - 3], r1 = ratio_row[n - 2], r2 = ratio_row[n - 1];
        if (r0 > 0 && r1 > 0 && r2 > 0) {
            const double lr = std::log(probe.ladder_ratio);
            const double s1 = std::log(r1 / r0) / lr;
            const double s2 = std::log(r2 / r1) / lr;
            constexpr double flat = 0.1;
            if (s1 > flat && s2 > flat)
                report.ratio = RatioTrend::diverging;
            else if (s1 < -flat && s2 < -flat)
                report.ratio = RatioTrend::vanishing;
            else if (std::fabs(s1) <= flat && std::fabs(s2) <= flat)
                report.ratio = RatioTrend::bounded;
            if (report.ratio != RatioTrend::inconclusive)
                report.ratio_exponent = s2;
        }
    }
    return report;
}

} // namespace blowup::transforms
