#include <doctest.h>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "blowup/expr.hpp"
#include "expr_oracles.hpp"

using namespace blowup::expr;
using namespace oracles;

namespace {

Expression X() { return Expression::variable(Var::x); }
Expression Y() { return Expression::variable(Var::y); }
Expression T() { return Expression::variable(Var::t); }

} // namespace

TEST_CASE("parse builds the expected trees") {
    CHECK(parse("y^2") == Expression::binary(Op::pow, Y(), C(2)));
    CHECK(parse("2*y^3") == Expression::binary(Op::mul, C(2), Expression::binary(Op::pow, Y(), C(3))));
    CHECK(parse("-y^2") == Expression::unary(Op::neg, Expression::binary(Op::pow, Y(), C(2))));
    CHECK(parse("2^3^2") == Expression::binary(Op::pow, C(2), Expression::binary(Op::pow, C(3), C(2))));
    CHECK(parse("x-y-t") == Expression::binary(Op::sub, Expression::binary(Op::sub, X(), Y()), T()));
    CHECK(parse("x/y*t") == Expression::binary(Op::mul, Expression::binary(Op::div, X(), Y()), T()));
    CHECK(parse("-2") == C(-2));
    CHECK(parse("sqrt(y)") == Expression::unary(Op::sqrt, Y()));
    CHECK(parse(" ( x ) ") == X());
}

TEST_CASE("parse errors carry the column") {
    auto column_of = [](const char* src) -> std::size_t {
        try {
            parse(src);
        } catch (const ParseError& e) {
            return e.column();
        }
        return 0;
    };
    CHECK(column_of("y^^2") == 3);
    CHECK(column_of("z+1") == 1);
    CHECK(column_of("y)") == 2);
    CHECK(column_of("2y") == 2);
    CHECK(column_of("sin(y)") == 1);
    CHECK(column_of("(y") >= 1);
    CHECK(column_of("") >= 1);
    CHECK(column_of("y+") >= 1);
    CHECK_THROWS_AS(parse("1..2"), ParseError);
}

TEST_CASE("evaluate") {
    CHECK(evaluate(parse("y^2"), Bindings(0, 3)) == 9);
    CHECK(evaluate(parse("2*y^3"), Bindings(0, 2)) == 16);
    CHECK(evaluate(parse("t/y"), Bindings(0, 2, 6)) == 3);
    CHECK(evaluate(parse("sign(-3)+sign(0)+abs(-2)"), Bindings()) == 1);

    auto kind_of = [](const char* src, const Bindings& b) {
        try {
            evaluate(parse(src), b);
        } catch (const EvalError& e) {
            return e.kind();
        }
        FAIL("no error for " << src);
        return EvalError::Kind::domain;
    };
    CHECK(kind_of("1/y", Bindings(0, 0)) == EvalError::Kind::division_by_zero);
    CHECK(kind_of("y^-1", Bindings(0, 0)) == EvalError::Kind::division_by_zero);
    CHECK(kind_of("t", Bindings(0, 1)) == EvalError::Kind::unbound_variable);
    CHECK(kind_of("ln(y)", Bindings(0, -1)) == EvalError::Kind::domain);
    CHECK(kind_of("sqrt(y)", Bindings(0, -1)) == EvalError::Kind::domain);
    CHECK(kind_of("y^0.5", Bindings(0, -8)) == EvalError::Kind::domain);
    CHECK(kind_of("exp(y)", Bindings(0, 1000)) == EvalError::Kind::non_finite);
    CHECK(kind_of("y*y", Bindings(0, 1e200)) == EvalError::Kind::non_finite);
    CHECK(evaluate(parse("y^3"), Bindings(0, -2)) == -8);
}

TEST_CASE("differentiate: closed forms") {
    CHECK(differentiate(parse("y^2"), Var::y) == parse("2*y"));
    CHECK(differentiate(parse("y^2"), Var::x) == C(0));
    const Expression d = differentiate(parse("2*y^3"), Var::y);
    CHECK(d == parse("6*y^2"));
    for (double y : {0.5, 1.0, 2.0}) {
        const Bindings b(0, y);
        const double fd = central_fd(parse("2*y^3"), Var::y, b, 1e-5);
        CHECK(std::fabs(evaluate(d, b) - fd) <= 1e-8 * std::fabs(fd));
    }
    CHECK(evaluate(differentiate(parse("abs(y)"), Var::y), Bindings(0, -3)) == -1);
    CHECK(evaluate(differentiate(parse("abs(y)"), Var::y), Bindings(0, 0)) == 0);
    CHECK(evaluate(differentiate(parse("x^y"), Var::y), Bindings(2, 3)) ==
          doctest::Approx(8 * std::log(2.0)).epsilon(1e-14));
    CHECK(evaluate(differentiate(parse("ln(x*y)"), Var::x), Bindings(4, 7)) == doctest::Approx(0.25));
}

TEST_CASE("depends_on") {
    CHECK(depends_on(parse("x+y"), Var::x));
    CHECK_FALSE(depends_on(parse("x+y"), Var::t));
    CHECK_FALSE(depends_on(parse("2^3"), Var::y));
}

TEST_CASE("property: symbolic derivative agrees with central differences") {
    TreeGen gen(20240611);
    int accepted = 0;
    int attempts = 0;
    while (accepted < 100) {
        REQUIRE(++attempts < 5000);
        const Expression e = gen.tree(1 + static_cast<int>(gen.pick(6)));
        std::vector<Bindings> points;
        for (int tries = 0; tries < 300 && points.size() < 10; ++tries) {
            const Bindings b(0.3 + 1.7 * gen.unit(), 0.3 + 1.7 * gen.unit(), 0.3 + 1.7 * gen.unit());
            if (well_inside(e, b))
                points.push_back(b);
        }
        if (points.size() < 10)
            continue;
        ++accepted;
        for (Var v : {Var::x, Var::y, Var::t}) {
            const Expression d = differentiate(e, v);
            for (const Bindings& b : points) {
                const double fd = central_fd(e, v, b);
                const double sym = evaluate(d, b);
                INFO(to_string(e) << "  d/d" << name_of(v) << " = " << to_string(d));
                CHECK(std::fabs(sym - fd) <= 1e-6 * (1 + std::fabs(fd)));
            }
        }
    }
}

TEST_CASE("round trip: corpus") {
    for (const std::string& s : corpus()) {
        INFO(s);
        const Expression e = parse(s);
        const std::string printed = to_string(e);
        CHECK(parse(printed) == e);
        CHECK(to_string(parse(printed)) == printed);
    }
}

TEST_CASE("round trip: random trees") {
    TreeGen gen(7);
    for (int i = 0; i < 2000; ++i) {
        const Expression e = gen.tree(static_cast<int>(gen.pick(7)));
        const std::string printed = to_string(e);
        INFO(printed);
        CHECK(parse(printed) == e);
    }
}

TEST_CASE("property: evaluate never returns a non-finite value") {
    TreeGen gen(99);
    for (int i = 0; i < 2000; ++i) {
        const Expression e = gen.tree(static_cast<int>(gen.pick(7)));
        const double scale = std::ldexp(1.0, static_cast<int>(gen.pick(40)) - 10);
        const Bindings b(scale * (gen.unit() - 0.5), scale * (gen.unit() - 0.5), scale * (gen.unit() - 0.5));
        double v = 0;
        try {
            v = evaluate(e, b);
        } catch (const EvalError&) {
            continue;
        }
        CHECK(std::isfinite(v));
    }
}

TEST_CASE("simplifying constructors") {
    CHECK(C(0) * Y() == C(0));
    CHECK(C(1) * Y() == Y());
    CHECK(Y() + C(0) == Y());
    CHECK(Y() / C(1) == Y());
    CHECK(pow(Y(), C(1)) == Y());
    CHECK(pow(Y(), C(0)) == C(1));
    CHECK(-(-Y()) == Y());
    CHECK(C(2) + C(3) == C(5));
    CHECK(C(2) * (C(3) * Y()) == C(6) * Y());
}
