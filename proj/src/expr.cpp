#include "blowup/expr.hpp"

#include <charconv>
#include <cmath>
#include <optional>
#include <ostream>

namespace blowup::expr {

struct Expression::Node {
    Op op;
    double value = 0.0;
    Var var = Var::x;
    std::optional<Expression> a;
    std::optional<Expression> b;
};

char name_of(Var v) {
    switch (v) {
    case Var::x: return 'x';
    case Var::y: return 'y';
    case Var::t: return 't';
    }
    return '?';
}

bool is_unary(Op op) { return op >= Op::neg && op <= Op::ln; }
bool is_binary(Op op) { return op >= Op::add; }

ParseError::ParseError(std::size_t column, std::string expected, std::string_view source)
    : Error("parse error at column " + std::to_string(column) + ": expected " + expected +
            " in \"" + std::string(source) + "\""),
      column_(column), expected_(std::move(expected)) {}

double Bindings::get(Var v) const {
    if (!bound(v))
        throw EvalError(EvalError::Kind::unbound_variable,
                        std::string("unbound variable '") + name_of(v) + "'");
    return values_[index(v)];
}

// ---- construction and access --------------------------------------------

Expression Expression::constant(double value) {
    return Expression(std::make_shared<const Node>(Node{Op::constant, value, Var::x, std::nullopt, std::nullopt}));
}

Expression Expression::variable(Var v) {
    return Expression(std::make_shared<const Node>(Node{Op::variable, 0.0, v, std::nullopt, std::nullopt}));
}

Expression Expression::unary(Op op, Expression operand) {
    if (!is_unary(op))
        throw std::invalid_argument("Expression::unary: not a unary operator");
    return Expression(std::make_shared<const Node>(Node{op, 0.0, Var::x, std::move(operand), std::nullopt}));
}

Expression Expression::binary(Op op, Expression lhs, Expression rhs) {
    if (!is_binary(op))
        throw std::invalid_argument("Expression::binary: not a binary operator");
    return Expression(std::make_shared<const Node>(
        Node{op, 0.0, Var::x, std::move(lhs), std::move(rhs)}));
}

Op Expression::op() const noexcept { return node_->op; }
double Expression::value() const noexcept { return node_->value; }
Var Expression::var() const noexcept { return node_->var; }

const Expression& Expression::lhs() const {
    if (!node_->a)
        throw std::logic_error("Expression::lhs on a leaf");
    return *node_->a;
}

const Expression& Expression::rhs() const {
    if (!node_->b)
        throw std::logic_error("Expression::rhs on a non-binary node");
    return *node_->b;
}

bool Expression::is_constant(double v) const noexcept {
    return node_->op == Op::constant && node_->value == v;
}

bool operator==(const Expression& a, const Expression& b) {
    if (a.node_ == b.node_)
        return true;
    if (a.op() != b.op())
        return false;
    switch (a.op()) {
    case Op::constant: return a.value() == b.value();
    case Op::variable: return a.var() == b.var();
    default: break;
    }
    if (!(a.lhs() == b.lhs()))
        return false;
    return !is_binary(a.op()) || a.rhs() == b.rhs();
}

bool depends_on(const Expression& e, Var v) {
    switch (e.op()) {
    case Op::constant: return false;
    case Op::variable: return e.var() == v;
    default: break;
    }
    if (depends_on(e.lhs(), v))
        return true;
    return is_binary(e.op()) && depends_on(e.rhs(), v);
}

// ---- evaluation ----------------------------------------------------------

namespace {

const char* op_name(Op op) {
    switch (op) {
    case Op::neg: return "-";
    case Op::abs: return "abs";
    case Op::sign: return "sign";
    case Op::sqrt: return "sqrt";
    case Op::exp: return "exp";
    case Op::ln: return "ln";
    case Op::add: return "+";
    case Op::sub: return "-";
    case Op::mul: return "*";
    case Op::div: return "/";
    case Op::pow: return "^";
    default: return "";
    }
}

double checked(double r, Op op) {
    if (!std::isfinite(r))
        throw EvalError(EvalError::Kind::non_finite,
                        std::string("non-finite result of '") + op_name(op) + "'");
    return r;
}

double sign_of(double u) { return u > 0 ? 1.0 : (u < 0 ? -1.0 : 0.0); }

} // namespace

double evaluate(const Expression& e, const Bindings& b) {
    switch (e.op()) {
    case Op::constant: return e.value();
    case Op::variable: return b.get(e.var());
    default: break;
    }
    const double u = evaluate(e.lhs(), b);
    switch (e.op()) {
    case Op::neg: return -u;
    case Op::abs: return std::fabs(u);
    case Op::sign: return sign_of(u);
    case Op::sqrt:
        if (u < 0)
            throw EvalError(EvalError::Kind::domain, "sqrt of negative argument");
        return std::sqrt(u);
    case Op::exp: return checked(std::exp(u), Op::exp);
    case Op::ln:
        if (u <= 0)
            throw EvalError(EvalError::Kind::domain, "ln of non-positive argument");
        return std::log(u);
    default: break;
    }
    const double v = evaluate(e.rhs(), b);
    switch (e.op()) {
    case Op::add: return checked(u + v, Op::add);
    case Op::sub: return checked(u - v, Op::sub);
    case Op::mul: return checked(u * v, Op::mul);
    case Op::div:
        if (v == 0)
            throw EvalError(EvalError::Kind::division_by_zero, "division by zero");
        return checked(u / v, Op::div);
    case Op::pow:
        if (u == 0 && v < 0)
            throw EvalError(EvalError::Kind::division_by_zero, "zero raised to a negative power");
        if (u < 0 && std::trunc(v) != v)
            throw EvalError(EvalError::Kind::domain, "negative base with non-integer exponent");
        return checked(std::pow(u, v), Op::pow);
    default: break;
    }
    throw std::logic_error("evaluate: unknown operator");
}

// ---- printing --------------------------------------------------------------

namespace {

enum Prec : int { p_sum = 1, p_product = 2, p_unary = 3, p_power = 4, p_atom = 5 };

std::string format_number(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

int precedence(const Expression& e) {
    switch (e.op()) {
    case Op::constant: return std::signbit(e.value()) ? p_unary : p_atom;
    case Op::variable: return p_atom;
    case Op::neg: return p_unary;
    case Op::abs:
    case Op::sign:
    case Op::sqrt:
    case Op::exp:
    case Op::ln: return p_atom;
    case Op::add:
    case Op::sub: return p_sum;
    case Op::mul:
    case Op::div: return p_product;
    case Op::pow: return p_power;
    }
    return p_atom;
}

void print(const Expression& e, int min_prec, std::string& out) {
    const int prec = precedence(e);
    const bool paren = prec < min_prec;
    if (paren)
        out += '(';
    switch (e.op()) {
    case Op::constant: out += format_number(e.value()); break;
    case Op::variable: out += name_of(e.var()); break;
    case Op::neg:
        out += '-';
        // "-2" would re-parse as a folded constant; keep the negation node.
        if (e.lhs().op() == Op::constant && !std::signbit(e.lhs().value())) {
            out += '(';
            print(e.lhs(), p_sum, out);
            out += ')';
        } else {
            print(e.lhs(), p_unary, out);
        }
        break;
    case Op::abs:
    case Op::sign:
    case Op::sqrt:
    case Op::exp:
    case Op::ln:
        out += op_name(e.op());
        out += '(';
        print(e.lhs(), p_sum, out);
        out += ')';
        break;
    case Op::add:
    case Op::sub:
        print(e.lhs(), p_sum, out);
        out += op_name(e.op());
        print(e.rhs(), p_product, out);
        break;
    case Op::mul:
    case Op::div:
        print(e.lhs(), p_product, out);
        out += op_name(e.op());
        print(e.rhs(), p_unary, out);
        break;
    case Op::pow:
        print(e.lhs(), p_atom, out);
        out += '^';
        print(e.rhs(), p_unary, out);
        break;
    }
    if (paren)
        out += ')';
}

} // namespace

std::string to_string(const Expression& e) {
    std::string out;
    print(e, p_sum, out);
    return out;
}

std::ostream& operator<<(std::ostream& os, const Expression& e) { return os << to_string(e); }

// ---- simplifying constructors -----------------------------------------------

namespace {

bool is_const(const Expression& e) { return e.op() == Op::constant; }

Expression fold_or(double r, Expression fallback) {
    return std::isfinite(r) ? Expression::constant(r) : std::move(fallback);
}

} // namespace

Expression operator+(const Expression& a, const Expression& b) {
    if (is_const(a) && is_const(b))
        return fold_or(a.value() + b.value(), Expression::binary(Op::add, a, b));
    if (a.is_constant(0))
        return b;
    if (b.is_constant(0))
        return a;
    return Expression::binary(Op::add, a, b);
}

Expression operator-(const Expression& a, const Expression& b) {
    if (is_const(a) && is_const(b))
        return fold_or(a.value() - b.value(), Expression::binary(Op::sub, a, b));
    if (b.is_constant(0))
        return a;
    if (a.is_constant(0))
        return -b;
    return Expression::binary(Op::sub, a, b);
}

Expression operator*(const Expression& a, const Expression& b) {
    if (is_const(a) && is_const(b))
        return fold_or(a.value() * b.value(), Expression::binary(Op::mul, a, b));
    if (a.is_constant(0) || b.is_constant(0))
        return Expression::constant(0);
    if (a.is_constant(1))
        return b;
    if (b.is_constant(1))
        return a;
    if (is_const(b))
        return b * a;
    if (is_const(a)) {
        if (a.is_constant(-1))
            return -b;
        // c1*(c2*u) -> (c1*c2)*u
        if (b.op() == Op::mul && is_const(b.lhs()))
            return Expression::constant(a.value() * b.lhs().value()) * b.rhs();
    }
    return Expression::binary(Op::mul, a, b);
}

Expression operator/(const Expression& a, const Expression& b) {
    if (is_const(a) && is_const(b) && b.value() != 0)
        return fold_or(a.value() / b.value(), Expression::binary(Op::div, a, b));
    if (a.is_constant(0) && !is_const(b))
        return a;
    if (b.is_constant(1))
        return a;
    return Expression::binary(Op::div, a, b);
}

Expression operator-(const Expression& a) {
    if (is_const(a))
        return Expression::constant(-a.value());
    if (a.op() == Op::neg)
        return a.lhs();
    return Expression::unary(Op::neg, a);
}

Expression pow(const Expression& base, const Expression& exponent) {
    if (exponent.is_constant(1))
        return base;
    if (exponent.is_constant(0))
        return Expression::constant(1);
    if (is_const(base) && is_const(exponent)) {
        const double u = base.value(), v = exponent.value();
        if (!(u == 0 && v < 0) && !(u < 0 && std::trunc(v) != v))
            return fold_or(std::pow(u, v), Expression::binary(Op::pow, base, exponent));
    }
    return Expression::binary(Op::pow, base, exponent);
}

Expression apply(Op unary_op, const Expression& operand) {
    if (unary_op == Op::neg)
        return -operand;
    if (is_const(operand)) {
        const double u = operand.value();
        switch (unary_op) {
        case Op::abs: return Expression::constant(std::fabs(u));
        case Op::sign: return Expression::constant(sign_of(u));
        case Op::sqrt:
            if (u >= 0)
                return Expression::constant(std::sqrt(u));
            break;
        case Op::exp: return fold_or(std::exp(u), Expression::unary(unary_op, operand));
        case Op::ln:
            if (u > 0)
                return Expression::constant(std::log(u));
            break;
        default: break;
        }
    }
    return Expression::unary(unary_op, operand);
}

} // namespace blowup::expr
