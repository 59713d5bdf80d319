#include "blowup/expr.hpp"

namespace blowup::expr {

namespace {

Expression num(double v) { return Expression::constant(v); }

} // namespace

Expression differentiate(const Expression& e, Var v) {
    switch (e.op()) {
    case Op::constant: return num(0);
    case Op::variable: return num(e.var() == v ? 1 : 0);
    default: break;
    }

    const Expression& u = e.lhs();
    const Expression du = differentiate(u, v);
    switch (e.op()) {
    case Op::neg: return -du;
    case Op::abs: return apply(Op::sign, u) * du;
    case Op::sign: return num(0);
    case Op::sqrt: return du / (num(2) * e);
    case Op::exp: return e * du;
    case Op::ln: return du / u;
    default: break;
    }

    const Expression& w = e.rhs();
    const Expression dw = differentiate(w, v);
    switch (e.op()) {
    case Op::add: return du + dw;
    case Op::sub: return du - dw;
    case Op::mul: return du * w + u * dw;
    case Op::div:
        if (dw.is_constant(0))
            return du / w;
        return (du * w - u * dw) / pow(w, num(2));
    case Op::pow:
        if (!depends_on(w, v)) {
            // c * u^(c-1) * u'
            const Expression reduced = w.op() == Op::constant ? num(w.value() - 1) : w - num(1);
            return w * pow(u, reduced) * du;
        }
        if (!depends_on(u, v))
            return e * apply(Op::ln, u) * dw;
        return e * (dw * apply(Op::ln, u) + w * du / u);
    default: break;
    }
    throw std::logic_error("differentiate: unknown operator");
}

} // namespace blowup::expr
