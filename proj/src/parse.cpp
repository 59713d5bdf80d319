#include "blowup/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>

namespace blowup::expr {

namespace {

class Parser {
public:
    explicit Parser(std::string_view src) : src_(src) {}

    Expression run() {
        skip_space();
        if (at_end())
            fail(0, "an expression");
        Expression e = parse_sum();
        skip_space();
        if (!at_end())
            fail(pos_, "an operator or end of input");
        return e;
    }

private:
    [[noreturn]] void fail(std::size_t pos, const std::string& expected) const {
        // Errors at end of input point at the last character.
        std::size_t col = pos + 1;
        if (!src_.empty() && col > src_.size())
            col = src_.size();
        throw ParseError(col, expected, src_);
    }

    bool at_end() const { return pos_ >= src_.size(); }
    char peek() const { return at_end() ? '\0' : src_[pos_]; }

    void skip_space() {
        while (!at_end() && std::isspace(static_cast<unsigned char>(src_[pos_])))
            ++pos_;
    }

    bool accept(char c) {
        skip_space();
        if (peek() == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    Expression parse_sum() {
        Expression lhs = parse_product();
        for (;;) {
            if (accept('+'))
                lhs = Expression::binary(Op::add, lhs, parse_product());
            else if (accept('-'))
                lhs = Expression::binary(Op::sub, lhs, parse_product());
            else
                return lhs;
        }
    }

    Expression parse_product() {
        Expression lhs = parse_unary();
        for (;;) {
            if (accept('*'))
                lhs = Expression::binary(Op::mul, lhs, parse_unary());
            else if (accept('/'))
                lhs = Expression::binary(Op::div, lhs, parse_unary());
            else
                return lhs;
        }
    }

    Expression parse_unary() {
        if (accept('-')) {
            skip_space();
            const bool literal = std::isdigit(static_cast<unsigned char>(peek())) || peek() == '.';
            Expression operand = parse_unary();
            if (literal && operand.op() == Op::constant)
                return Expression::constant(-operand.value());
            return Expression::unary(Op::neg, operand);
        }
        return parse_power();
    }

    Expression parse_power() {
        Expression base = parse_primary();
        if (accept('^'))
            return Expression::binary(Op::pow, base, parse_unary());
        return base;
    }

    Expression parse_primary() {
        skip_space();
        if (at_end())
            fail(pos_, "a number, variable, function or '('");
        const char c = peek();
        if (c == '(') {
            const std::size_t open = pos_++;
            Expression inner = parse_sum();
            if (!accept(')')) {
                skip_space();
                if (at_end())
                    fail(open, "a matching ')' for this '('");
                fail(pos_, "')'");
            }
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
            return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_')
            return parse_identifier();
        fail(pos_, "a number, variable, function or '('");
    }

    Expression parse_number() {
        const std::size_t start = pos_;
        auto digits = [&] {
            std::size_t n = 0;
            while (!at_end() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                ++pos_;
                ++n;
            }
            return n;
        };
        std::size_t n = digits();
        if (peek() == '.') {
            ++pos_;
            n += digits();
        }
        if (n == 0)
            fail(start, "a digit");
        if (peek() == 'e' || peek() == 'E') {
            const std::size_t mark = pos_++;
            if (peek() == '+' || peek() == '-')
                ++pos_;
            if (digits() == 0)
                fail(mark, "an exponent after 'e'");
        }
        double value = 0;
        const char* first = src_.data() + start;
        const char* last = src_.data() + pos_;
        auto res = std::from_chars(first, last, value);
        if (res.ec != std::errc() || res.ptr != last || !std::isfinite(value))
            fail(start, "a finite number");
        return Expression::constant(value);
    }

    Expression parse_identifier() {
        const std::size_t start = pos_;
        while (!at_end() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
            ++pos_;
        const std::string_view id = src_.substr(start, pos_ - start);
        if (id == "x")
            return Expression::variable(Var::x);
        if (id == "y")
            return Expression::variable(Var::y);
        if (id == "t")
            return Expression::variable(Var::t);

        Op fn;
        if (id == "abs")
            fn = Op::abs;
        else if (id == "sqrt")
            fn = Op::sqrt;
        else if (id == "exp")
            fn = Op::exp;
        else if (id == "ln")
            fn = Op::ln;
        else if (id == "sign")
            fn = Op::sign;
        else
            fail(start, "a variable (x, y, t) or function (abs, sqrt, exp, ln, sign), got unknown identifier '" +
                            std::string(id) + "'");

        if (!accept('(')) {
            skip_space();
            fail(pos_, "'(' after " + std::string(id));
        }
        const std::size_t open = pos_ - 1;
        Expression arg = parse_sum();
        if (!accept(')')) {
            skip_space();
            if (at_end())
                fail(open, "a matching ')' for this '('");
            fail(pos_, "')'");
        }
        return Expression::unary(fn, arg);
    }

    std::string_view src_;
    std::size_t pos_ = 0;
};

} // namespace

Expression parse(std::string_view source) { return Parser(source).run(); }

} // namespace blowup::expr
