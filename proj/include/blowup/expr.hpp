#pragma once

// Scalar expressions over the variables x, y and t.
//
// Grammar (lowest to highest precedence):
//   sum     := product (('+' | '-') product)*
//   product := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?            (right associative)
//   primary := number | x | y | t | func '(' sum ')' | '(' sum ')'
//   func    := abs | sqrt | exp | ln | sign
//
// So -y^2 is -(y^2) and 2^3^2 is 2^(3^2). A unary minus applied directly to a
// numeric literal folds into a negative constant.
//
// The derivative of abs(u) is sign(u)*u', with sign(0) = 0. This is a
// library convention: abs is not differentiable at 0.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <string_view>

#include "blowup/errors.hpp"

namespace blowup::expr {

enum class Var : std::uint8_t { x = 0, y = 1, t = 2 };

char name_of(Var v);

enum class Op : std::uint8_t {
    constant,
    variable,
    // unary
    neg,
    abs,
    sign,
    sqrt,
    exp,
    ln,
    // binary
    add,
    sub,
    mul,
    div,
    pow,
};

bool is_unary(Op op);
bool is_binary(Op op);

class ParseError : public Error {
public:
    ParseError(std::size_t column, std::string expected, std::string_view source);

    /// 1-based column of the offending character.
    std::size_t column() const noexcept { return column_; }
    const std::string& expected() const noexcept { return expected_; }

private:
    std::size_t column_;
    std::string expected_;
};

class EvalError : public Error {
public:
    enum class Kind { unbound_variable, division_by_zero, domain, non_finite };

    EvalError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

/// Immutable expression tree. Copies share structure.
class Expression {
public:
    Expression() = delete;

    static Expression constant(double value);
    static Expression variable(Var v);
    /// Raw node constructors; no simplification is applied.
    static Expression unary(Op op, Expression operand);
    static Expression binary(Op op, Expression lhs, Expression rhs);

    Op op() const noexcept;
    /// Only meaningful for Op::constant.
    double value() const noexcept;
    /// Only meaningful for Op::variable.
    Var var() const noexcept;
    /// Operand of a unary node, left operand of a binary node.
    const Expression& lhs() const;
    const Expression& rhs() const;

    bool is_constant(double v) const noexcept;

    friend bool operator==(const Expression& a, const Expression& b);

private:
    struct Node;
    explicit Expression(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
    std::shared_ptr<const Node> node_;
};

/// Variable values for evaluation; variables not set are unbound.
class Bindings {
public:
    Bindings() = default;
    Bindings(double x, double y) { set(Var::x, x); set(Var::y, y); }
    Bindings(double x, double y, double t) : Bindings(x, y) { set(Var::t, t); }

    Bindings& set(Var v, double value) {
        values_[index(v)] = value;
        bound_ |= static_cast<std::uint8_t>(1u << index(v));
        return *this;
    }
    bool bound(Var v) const noexcept { return (bound_ >> index(v)) & 1u; }
    double get(Var v) const;

private:
    static constexpr std::size_t index(Var v) { return static_cast<std::size_t>(v); }
    std::array<double, 3> values_{};
    std::uint8_t bound_ = 0;
};

Expression parse(std::string_view source);

/// Throws EvalError on unbound variables, division by zero, out-of-domain
/// arguments of ln/sqrt/pow, and on any non-finite intermediate result.
double evaluate(const Expression& e, const Bindings& b);

/// Exact symbolic partial derivative, lightly simplified.
Expression differentiate(const Expression& e, Var v);

bool depends_on(const Expression& e, Var v);

/// Minimal-parenthesis text form that parses back to an equal tree.
std::string to_string(const Expression& e);
std::ostream& operator<<(std::ostream& os, const Expression& e);

// Simplifying constructors. They fold constants and collapse 0*u, 1*u, u+0,
// u-0, u/1, u^1, u^0, --u; nothing more.
Expression operator+(const Expression& a, const Expression& b);
Expression operator-(const Expression& a, const Expression& b);
Expression operator*(const Expression& a, const Expression& b);
Expression operator/(const Expression& a, const Expression& b);
Expression operator-(const Expression& a);
Expression pow(const Expression& base, const Expression& exponent);
Expression apply(Op unary_op, const Expression& operand);

} // namespace blowup::expr
