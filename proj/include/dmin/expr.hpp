#pragma once

// Holomorphic expressions in one complex variable, and the real two-variable
// instantiation used for graph heights and prescribed forms.
//
// Grammar (whitespace-insensitive):
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('-' | '+') unary | power
//   power   := primary ('^' unary)?          right-associative, binds tighter than unary minus
//   primary := number | constant | variable | func '(' expr ')' | '(' expr ')'
//   func    := exp | log | sin | cos | sinh | cosh
// Constants: pi, e, and i (complex mode only).
//
// log and non-integer powers use the principal branch; callers pick domains
// that avoid the cut along the negative real axis.

#include "dmin/error.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <complex>
#include <cstdint>
#include <memory>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace dmin {

using Complex = std::complex<double>;

enum class Func { exp, log, sin, cos, sinh, cosh };

inline std::string_view func_name(Func f) {
    switch (f) {
    case Func::exp: return "exp";
    case Func::log: return "log";
    case Func::sin: return "sin";
    case Func::cos: return "cos";
    case Func::sinh: return "sinh";
    case Func::cosh: return "cosh";
    }
    return "?";
}

/// Immutable expression tree. Copies share nodes.
class Expr {
public:
    enum class Kind { literal, variable, negate, add, sub, mul, div, pow, call };

    Expr() : Expr(literal(0.0)) {}

    static Expr literal(Complex value) {
        if (!std::isfinite(value.real()) || !std::isfinite(value.imag()))
            throw EvalError(EvalErrorKind::overflow, "non-finite literal");
        auto n = std::make_shared<Node>();
        n->kind = Kind::literal;
        n->value = value;
        return Expr(std::move(n));
    }

    static Expr variable(int index) {
        auto n = std::make_shared<Node>();
        n->kind = Kind::variable;
        n->var = index;
        return Expr(std::move(n));
    }

    static Expr unary(Kind kind, Expr a) {
        auto n = std::make_shared<Node>();
        n->kind = kind;
        n->lhs = std::move(a.node_);
        return Expr(std::move(n));
    }

    static Expr binary(Kind kind, Expr a, Expr b) {
        auto n = std::make_shared<Node>();
        n->kind = kind;
        n->lhs = std::move(a.node_);
        n->rhs = std::move(b.node_);
        return Expr(std::move(n));
    }

    static Expr call(Func f, Expr a) {
        auto n = std::make_shared<Node>();
        n->kind = Kind::call;
        n->func = f;
        n->lhs = std::move(a.node_);
        return Expr(std::move(n));
    }

    Kind kind() const noexcept { return node_->kind; }
    Complex value() const noexcept { return node_->value; }
    int var() const noexcept { return node_->var; }
    Func func() const noexcept { return node_->func; }
    Expr lhs() const { return Expr(node_->lhs); }
    Expr rhs() const { return Expr(node_->rhs); }

    bool is_literal() const noexcept { return node_->kind == Kind::literal; }
    bool is_literal(Complex c) const noexcept { return is_literal() && node_->value == c; }

    bool depends_on(int index) const {
        switch (node_->kind) {
        case Kind::literal: return false;
        case Kind::variable: return node_->var == index;
        case Kind::negate:
        case Kind::call: return lhs().depends_on(index);
        default: return lhs().depends_on(index) || rhs().depends_on(index);
        }
    }

private:
    struct Node {
        Kind kind = Kind::literal;
        Complex value{};
        int var = 0;
        Func func = Func::exp;
        std::shared_ptr<const Node> lhs, rhs;
    };

    explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

    std::shared_ptr<const Node> node_;
};

// ---------------------------------------------------------------------------
// Evaluation

namespace detail {

inline Complex checked(Complex c, const char* what) {
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
        throw EvalError(EvalErrorKind::overflow, std::string("overflow in ") + what);
    return c;
}

inline std::optional<long long> as_integer(Complex c) {
    if (c.imag() != 0.0) return std::nullopt;
    double r = c.real();
    if (std::abs(r) > 1e6 || r != std::floor(r)) return std::nullopt;
    return static_cast<long long>(r);
}

inline Complex ipow(Complex base, long long n) {
    if (n < 0) {
        if (base == Complex(0.0))
            throw EvalError(EvalErrorKind::division_by_zero, "zero raised to a negative power");
        return Complex(1.0) / ipow(base, -n);
    }
    Complex result(1.0);
    while (n > 0) {
        if (n & 1) result *= base;
        base *= base;
        n >>= 1;
    }
    return result;
}

inline Complex power(Complex base, Complex exponent) {
    if (auto n = as_integer(exponent)) return ipow(base, *n);
    if (base == Complex(0.0)) {
        if (exponent.real() > 0.0) return Complex(0.0);
        throw EvalError(EvalErrorKind::domain, "zero raised to a power with non-positive real part");
    }
    return std::exp(exponent * std::log(base));
}

} // namespace detail

/// Evaluates `e` with the given variable values. Throws EvalError rather than
/// returning non-finite values.
inline Complex eval(const Expr& e, std::span<const Complex> vars) {
    using K = Expr::Kind;
    switch (e.kind()) {
    case K::literal: return e.value();
    case K::variable:
        if (e.var() < 0 || static_cast<std::size_t>(e.var()) >= vars.size())
            throw EvalError(EvalErrorKind::domain, "unbound variable");
        return vars[e.var()];
    case K::negate: return -eval(e.lhs(), vars);
    case K::add: return detail::checked(eval(e.lhs(), vars) + eval(e.rhs(), vars), "addition");
    case K::sub: return detail::checked(eval(e.lhs(), vars) - eval(e.rhs(), vars), "subtraction");
    case K::mul: return detail::checked(eval(e.lhs(), vars) * eval(e.rhs(), vars), "multiplication");
    case K::div: {
        Complex num = eval(e.lhs(), vars);
        Complex den = eval(e.rhs(), vars);
        if (den == Complex(0.0)) throw EvalError(EvalErrorKind::division_by_zero, "division by zero");
        return detail::checked(num / den, "division");
    }
    case K::pow: return detail::checked(detail::power(eval(e.lhs(), vars), eval(e.rhs(), vars)), "power");
    case K::call: {
        Complex a = eval(e.lhs(), vars);
        switch (e.func()) {
        case Func::exp: return detail::checked(std::exp(a), "exp");
        case Func::log:
            if (a == Complex(0.0)) throw EvalError(EvalErrorKind::domain, "log(0)");
            return std::log(a);
        case Func::sin: return detail::checked(std::sin(a), "sin");
        case Func::cos: return detail::checked(std::cos(a), "cos");
        case Func::sinh: return detail::checked(std::sinh(a), "sinh");
        case Func::cosh: return detail::checked(std::cosh(a), "cosh");
        }
    }
    }
    throw EvalError(EvalErrorKind::domain, "malformed expression");
}

inline Complex eval(const Expr& e, Complex z) { return eval(e, std::span<const Complex>(&z, 1)); }

/// Real evaluation of a two-variable (u, v) expression. A result with a
/// non-negligible imaginary part (e.g. log of a negative number) is a domain error.
inline double eval_real(const Expr& e, double u, double v) {
    const std::array<Complex, 2> vars{Complex(u), Complex(v)};
    Complex r = eval(e, vars);
    if (std::abs(r.imag()) > 1e-12 * (1.0 + std::abs(r.real())))
        throw EvalError(EvalErrorKind::domain, "real expression left the real domain");
    return r.real();
}

// ---------------------------------------------------------------------------
// Builders with light constant folding

namespace build {

inline Expr lit(Complex c) { return Expr::literal(c); }

inline Expr neg(Expr a) {
    if (a.is_literal()) return lit(-a.value());
    if (a.kind() == Expr::Kind::negate) return a.lhs();
    return Expr::unary(Expr::Kind::negate, std::move(a));
}

inline Expr add(Expr a, Expr b) {
    if (a.is_literal(0.0)) return b;
    if (b.is_literal(0.0)) return a;
    if (a.is_literal() && b.is_literal()) return lit(a.value() + b.value());
    return Expr::binary(Expr::Kind::add, std::move(a), std::move(b));
}

inline Expr sub(Expr a, Expr b) {
    if (b.is_literal(0.0)) return a;
    if (a.is_literal(0.0)) return neg(std::move(b));
    if (a.is_literal() && b.is_literal()) return lit(a.value() - b.value());
    return Expr::binary(Expr::Kind::sub, std::move(a), std::move(b));
}

inline Expr mul(Expr a, Expr b) {
    if (a.is_literal(0.0) || b.is_literal(0.0)) return lit(0.0);
    if (a.is_literal(1.0)) return b;
    if (b.is_literal(1.0)) return a;
    if (a.is_literal() && b.is_literal()) return lit(a.value() * b.value());
    return Expr::binary(Expr::Kind::mul, std::move(a), std::move(b));
}

inline Expr div(Expr a, Expr b) {
    if (b.is_literal(1.0)) return a;
    if (a.is_literal(0.0) && !b.is_literal(0.0)) return lit(0.0);
    if (a.is_literal() && b.is_literal() && b.value() != Complex(0.0)) return lit(a.value() / b.value());
    return Expr::binary(Expr::Kind::div, std::move(a), std::move(b));
}

inline Expr pow(Expr a, Expr b) {
    if (b.is_literal(1.0)) return a;
    if (b.is_literal(0.0)) return lit(1.0);
    return Expr::binary(Expr::Kind::pow, std::move(a), std::move(b));
}

inline Expr call(Func f, Expr a) { return Expr::call(f, std::move(a)); }

} // namespace build

// ---------------------------------------------------------------------------
// Symbolic differentiation

/// d/d(variable `index`) by the standard rules. Simplification is limited to
/// constant folding; correctness is judged by evaluation.
inline Expr differentiate(const Expr& e, int index = 0) {
    using K = Expr::Kind;
    using namespace build;
    if (!e.depends_on(index)) return lit(0.0);
    switch (e.kind()) {
    case K::literal: return lit(0.0);
    case K::variable: return lit(e.var() == index ? 1.0 : 0.0);
    case K::negate: return neg(differentiate(e.lhs(), index));
    case K::add: return add(differentiate(e.lhs(), index), differentiate(e.rhs(), index));
    case K::sub: return sub(differentiate(e.lhs(), index), differentiate(e.rhs(), index));
    case K::mul: {
        Expr a = e.lhs(), b = e.rhs();
        return add(mul(differentiate(a, index), b), mul(a, differentiate(b, index)));
    }
    case K::div: {
        Expr a = e.lhs(), b = e.rhs();
        Expr num = sub(mul(differentiate(a, index), b), mul(a, differentiate(b, index)));
        return div(num, pow(b, lit(2.0)));
    }
    case K::pow: {
        Expr a = e.lhs(), b = e.rhs();
        if (!b.depends_on(index)) {
            Expr reduced = b.is_literal() ? lit(b.value() - 1.0) : sub(b, lit(1.0));
            return mul(mul(b, pow(a, reduced)), differentiate(a, index));
        }
        // a^b * (b' log a + b a' / a)
        Expr term = add(mul(differentiate(b, index), call(Func::log, a)),
                        div(mul(b, differentiate(a, index)), a));
        return mul(e, term);
    }
    case K::call: {
        Expr a = e.lhs();
        Expr da = differentiate(a, index);
        switch (e.func()) {
        case Func::exp: return mul(e, da);
        case Func::log: return div(da, a);
        case Func::sin: return mul(call(Func::cos, a), da);
        case Func::cos: return neg(mul(call(Func::sin, a), da));
        case Func::sinh: return mul(call(Func::cosh, a), da);
        case Func::cosh: return mul(call(Func::sinh, a), da);
        }
    }
    }
    return lit(0.0);
}

// ---------------------------------------------------------------------------
// Parsing

struct ParseOptions {
    std::vector<std::string> variables{"z"};
    bool complex_constants = true;

    static ParseOptions complex_variable() { return {}; }
    static ParseOptions real_uv() { return {{"u", "v"}, false}; }
};

namespace detail {

class Parser {
public:
    Parser(std::string_view src, const ParseOptions& opts) : src_(src), opts_(opts) {}

    Expr parse() {
        skip_ws();
        if (pos_ == src_.size()) fail({"expression"});
        Expr e = parse_expr();
        skip_ws();
        if (pos_ != src_.size()) fail({"'+'", "'-'", "'*'", "'/'", "'^'", "end of input"});
        return e;
    }

private:
    std::string_view src_;
    const ParseOptions& opts_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(std::vector<std::string> expected) const {
        std::string msg = "syntax error at offset " + std::to_string(pos_) + ": expected ";
        for (std::size_t k = 0; k < expected.size(); ++k) {
            if (k) msg += ", ";
            msg += expected[k];
        }
        if (pos_ < src_.size())
            msg += std::string(" but found '") + src_[pos_] + "'";
        else
            msg += " but found end of input";
        throw ParseError(pos_, std::move(expected), msg);
    }

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    Expr parse_expr() {
        Expr lhs = parse_term();
        for (;;) {
            if (accept('+'))
                lhs = Expr::binary(Expr::Kind::add, lhs, parse_term());
            else if (accept('-'))
                lhs = Expr::binary(Expr::Kind::sub, lhs, parse_term());
            else
                return lhs;
        }
    }

    Expr parse_term() {
        Expr lhs = parse_unary();
        for (;;) {
            if (accept('*'))
                lhs = Expr::binary(Expr::Kind::mul, lhs, parse_unary());
            else if (accept('/'))
                lhs = Expr::binary(Expr::Kind::div, lhs, parse_unary());
            else
                return lhs;
        }
    }

    Expr parse_unary() {
        if (accept('-')) return Expr::unary(Expr::Kind::negate, parse_unary());
        if (accept('+')) return parse_unary();
        return parse_power();
    }

    Expr parse_power() {
        Expr base = parse_primary();
        if (accept('^')) return Expr::binary(Expr::Kind::pow, base, parse_unary());
        return base;
    }

    static const std::vector<std::string>& operand_tokens() {
        static const std::vector<std::string> t{"number", "identifier", "'('", "'-'"};
        return t;
    }

    Expr parse_primary() {
        skip_ws();
        if (pos_ == src_.size()) fail(operand_tokens());
        char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            Expr inner = parse_expr();
            if (!accept(')')) fail({"')'"});
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
        fail(operand_tokens());
    }

    Expr parse_number() {
        const std::size_t start = pos_;
        double value = 0.0;
        auto [ptr, ec] = std::from_chars(src_.data() + pos_, src_.data() + src_.size(), value);
        if (ec != std::errc() || ptr == src_.data() + pos_) fail({"number"});
        if (!std::isfinite(value)) {
            pos_ = start;
            fail({"finite number"});
        }
        pos_ = static_cast<std::size_t>(ptr - src_.data());
        return Expr::literal(value);
    }

    Expr parse_identifier() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
            ++pos_;
        std::string name(src_.substr(start, pos_ - start));

        static constexpr std::array<Func, 6> funcs{Func::exp, Func::log, Func::sin,
                                                   Func::cos, Func::sinh, Func::cosh};
        for (Func f : funcs) {
            if (name == func_name(f)) {
                if (!accept('(')) fail({"'('"});
                Expr arg = parse_expr();
                if (!accept(')')) fail({"')'"});
                return Expr::call(f, arg);
            }
        }
        for (std::size_t k = 0; k < opts_.variables.size(); ++k)
            if (name == opts_.variables[k]) return Expr::variable(static_cast<int>(k));
        if (name == "pi") return Expr::literal(std::numbers::pi);
        if (name == "e") return Expr::literal(std::numbers::e);
        if (name == "i" && opts_.complex_constants) return Expr::literal(Complex(0.0, 1.0));
        throw UnknownIdentifierError(start, name);
    }
};

} // namespace detail

inline Expr parse_expr(std::string_view src, const ParseOptions& opts = {}) {
    return detail::Parser(src, opts).parse();
}

/// Parses a graph/forms expression in the real variables u and v.
inline Expr parse_real_expr(std::string_view src) { return parse_expr(src, ParseOptions::real_uv()); }

// ---------------------------------------------------------------------------
// Printing and structural comparison

namespace detail {

inline std::string format_double(double x) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    return std::string(buf.data(), ptr);
}

inline void print(const Expr& e, std::span<const std::string> names, std::string& out) {
    using K = Expr::Kind;
    switch (e.kind()) {
    case K::literal: {
        Complex c = e.value();
        if (c.imag() == 0.0 && c.real() >= 0.0 && !std::signbit(c.real())) {
            out += format_double(c.real());
        } else if (c == Complex(0.0, 1.0)) {
            out += "i";
        } else if (c.imag() == 0.0) {
            out += "(-" + format_double(-c.real()) + ")";
        } else {
            out += "(" + format_double(c.real()) + "+" + format_double(c.imag()) + "*i)";
        }
        return;
    }
    case K::variable:
        out += static_cast<std::size_t>(e.var()) < names.size() ? names[e.var()]
                                                                : "x" + std::to_string(e.var());
        return;
    case K::negate:
        out += "(-";
        print(e.lhs(), names, out);
        out += ")";
        return;
    case K::call:
        out += func_name(e.func());
        out += "(";
        print(e.lhs(), names, out);
        out += ")";
        return;
    default: break;
    }
    const char* op = e.kind() == K::add ? " + " : e.kind() == K::sub ? " - " : e.kind() == K::mul ? " * "
                   : e.kind() == K::div ? " / " : " ^ ";
    out += "(";
    print(e.lhs(), names, out);
    out += op;
    print(e.rhs(), names, out);
    out += ")";
}

} // namespace detail

/// Fully parenthesized text that parses back to the same tree.
inline std::string to_string(const Expr& e, const ParseOptions& opts = {}) {
    std::string out;
    detail::print(e, opts.variables, out);
    return out;
}

inline bool structurally_equal(const Expr& a, const Expr& b) {
    using K = Expr::Kind;
    if (a.kind() != b.kind()) return false;
    switch (a.kind()) {
    case K::literal: return a.value() == b.value();
    case K::variable: return a.var() == b.var();
    case K::negate: return structurally_equal(a.lhs(), b.lhs());
    case K::call: return a.func() == b.func() && structurally_equal(a.lhs(), b.lhs());
    default: return structurally_equal(a.lhs(), b.lhs()) && structurally_equal(a.rhs(), b.rhs());
    }
}

// ---------------------------------------------------------------------------

/// Largest Cauchy-Riemann defect max(|x_u - y_v|, |x_v + y_u|) of the
/// expression at w, from central differences of its real and imaginary parts.
/// Large values mean the stencil crossed a branch cut or a pole.
inline double cauchy_riemann_residual(const Expr& e, Complex w, double step) {
    if (!(step > 0.0)) throw std::invalid_argument("cauchy_riemann_residual: step must be positive");
    const Complex du(step, 0.0), dv(0.0, step);
    const Complex fu = (eval(e, w + du) - eval(e, w - du)) / (2.0 * step);
    const Complex fv = (eval(e, w + dv) - eval(e, w - dv)) / (2.0 * step);
    // f = x + iy: fu = x_u + i y_u, fv = x_v + i y_v
    return std::max(std::abs(fu.real() - fv.imag()), std::abs(fv.real() + fu.imag()));
}

} // namespace dmin
