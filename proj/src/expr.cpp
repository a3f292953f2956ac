#include "nmmix/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

namespace nmmix {

namespace {

std::string format_double(double v) {
    if (std::rint(v) == v && std::fabs(v) < 1e15) {
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.0f", v);
        return buf;
    }
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

ParseError::ParseError(std::size_t off, std::string exp, std::string fnd)
    : std::runtime_error("parse error at offset " + std::to_string(off) + ": expected " + exp +
                         ", found " + fnd),
      offset(off),
      expected(std::move(exp)),
      found(std::move(fnd)) {}

Expr Expr::child(int i) const {
    return Expr(i == 0 ? node_->a : node_->b);
}

Expr Expr::constant(double value) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Constant;
    n->value = value;
    return Expr(std::move(n));
}

Expr Expr::variable() {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Variable;
    return Expr(std::move(n));
}

namespace {

bool is_const(const Expr& e, double v) {
    return e.kind() == Expr::Kind::Constant && e.constant_value() == v;
}

}  // namespace

// The factories fold constant subexpressions where doing so is exact and
// cannot hide a quotient pole. Parsed trees stay as written; folding mainly
// keeps derivative() output small.
Expr Expr::sum(Expr a, Expr b) {
    if (a.kind() == Kind::Constant && b.kind() == Kind::Constant) {
        double v = a.constant_value() + b.constant_value();
        if (std::isfinite(v)) return constant(v);
    }
    if (is_const(a, 0.0)) return b;
    if (is_const(b, 0.0)) return a;
    auto n = std::make_shared<Node>();
    n->kind = Kind::Sum;
    n->a = a.node_;
    n->b = b.node_;
    return Expr(std::move(n));
}

Expr Expr::difference(Expr a, Expr b) {
    if (a.kind() == Kind::Constant && b.kind() == Kind::Constant) {
        double v = a.constant_value() - b.constant_value();
        if (std::isfinite(v)) return constant(v);
    }
    if (is_const(b, 0.0)) return a;
    auto n = std::make_shared<Node>();
    n->kind = Kind::Difference;
    n->a = a.node_;
    n->b = b.node_;
    return Expr(std::move(n));
}

Expr Expr::product(Expr a, Expr b) {
    if (a.kind() == Kind::Constant && b.kind() == Kind::Constant) {
        double v = a.constant_value() * b.constant_value();
        if (std::isfinite(v)) return constant(v);
    }
    if (is_const(a, 1.0)) return b;
    if (is_const(b, 1.0)) return a;
    auto n = std::make_shared<Node>();
    n->kind = Kind::Product;
    n->a = a.node_;
    n->b = b.node_;
    return Expr(std::move(n));
}

Expr Expr::quotient(Expr a, Expr b) {
    if (a.kind() == Kind::Constant && b.kind() == Kind::Constant && b.constant_value() != 0.0) {
        double v = a.constant_value() / b.constant_value();
        if (std::isfinite(v)) return constant(v);
    }
    if (is_const(b, 1.0)) return a;
    auto n = std::make_shared<Node>();
    n->kind = Kind::Quotient;
    n->a = a.node_;
    n->b = b.node_;
    return Expr(std::move(n));
}

Expr Expr::negate(Expr a) {
    if (a.kind() == Kind::Constant) return constant(-a.constant_value());
    if (a.kind() == Kind::Negate) return a.child(0);
    auto n = std::make_shared<Node>();
    n->kind = Kind::Negate;
    n->a = a.node_;
    return Expr(std::move(n));
}

Expr Expr::power(Expr base, int exponent) {
    if (exponent == 1) return base;
    if (base.kind() == Kind::Constant) {
        double v = std::pow(base.constant_value(), exponent);
        if (std::isfinite(v)) return constant(v);
    }
    auto n = std::make_shared<Node>();
    n->kind = Kind::Power;
    n->exponent = exponent;
    n->a = base.node_;
    return Expr(std::move(n));
}

Expr Expr::exp(Expr a) {
    if (a.kind() == Kind::Constant) return constant(std::exp(a.constant_value()));
    auto n = std::make_shared<Node>();
    n->kind = Kind::Exp;
    n->a = a.node_;
    return Expr(std::move(n));
}

Expr Expr::sin(Expr a) {
    if (a.kind() == Kind::Constant) return constant(std::sin(a.constant_value()));
    auto n = std::make_shared<Node>();
    n->kind = Kind::Sin;
    n->a = a.node_;
    return Expr(std::move(n));
}

Expr Expr::cos(Expr a) {
    if (a.kind() == Kind::Constant) return constant(std::cos(a.constant_value()));
    auto n = std::make_shared<Node>();
    n->kind = Kind::Cos;
    n->a = a.node_;
    return Expr(std::move(n));
}

namespace {

double eval_node(const Expr& e, double t) {
    using K = Expr::Kind;
    switch (e.kind()) {
        case K::Constant: return e.constant_value();
        case K::Variable: return t;
        case K::Sum: return eval_node(e.child(0), t) + eval_node(e.child(1), t);
        case K::Difference: return eval_node(e.child(0), t) - eval_node(e.child(1), t);
        case K::Product: return eval_node(e.child(0), t) * eval_node(e.child(1), t);
        case K::Quotient: {
            double num = eval_node(e.child(0), t);
            double den = eval_node(e.child(1), t);
            if (den == 0.0)
                throw std::domain_error("quotient denominator vanishes at t=" + format_double(t));
            return num / den;
        }
        case K::Negate: return -eval_node(e.child(0), t);
        case K::Power: {
            double base = eval_node(e.child(0), t);
            if (base == 0.0 && e.exponent() < 0)
                throw std::domain_error("negative power of zero at t=" + format_double(t));
            return std::pow(base, e.exponent());
        }
        case K::Exp: return std::exp(eval_node(e.child(0), t));
        case K::Sin: return std::sin(eval_node(e.child(0), t));
        case K::Cos: return std::cos(eval_node(e.child(0), t));
    }
    throw std::logic_error("unreachable expression kind");
}

}  // namespace

double Expr::eval(double t) const {
    double v = eval_node(*this, t);
    if (!std::isfinite(v))
        throw std::domain_error("expression not finite at t=" + format_double(t));
    return v;
}

Expr Expr::derivative() const {
    using K = Kind;
    switch (kind()) {
        case K::Constant: return constant(0.0);
        case K::Variable: return constant(1.0);
        case K::Sum: return sum(child(0).derivative(), child(1).derivative());
        case K::Difference: return difference(child(0).derivative(), child(1).derivative());
        case K::Product: {
            Expr a = child(0), b = child(1);
            return sum(product(a.derivative(), b), product(a, b.derivative()));
        }
        case K::Quotient: {
            Expr a = child(0), b = child(1);
            return quotient(difference(product(a.derivative(), b), product(a, b.derivative())),
                            power(b, 2));
        }
        case K::Negate: return negate(child(0).derivative());
        case K::Power: {
            if (exponent() == 0) return constant(0.0);
            Expr b = child(0);
            return product(product(constant(exponent()), power(b, exponent() - 1)),
                           b.derivative());
        }
        case K::Exp: return product(exp(child(0)), child(0).derivative());
        case K::Sin: return product(cos(child(0)), child(0).derivative());
        case K::Cos: return negate(product(sin(child(0)), child(0).derivative()));
    }
    throw std::logic_error("unreachable expression kind");
}

namespace {

// Precedence used both for printing and parsing:
// sum/difference (1) < product/quotient (2) < power (3) < unary minus (4) < atoms (5).
int precedence(Expr::Kind k) {
    using K = Expr::Kind;
    switch (k) {
        case K::Sum:
        case K::Difference: return 1;
        case K::Product:
        case K::Quotient: return 2;
        case K::Power: return 3;
        case K::Negate: return 4;
        default: return 5;
    }
}

void print_node(const Expr& e, int min_prec, std::string& out) {
    using K = Expr::Kind;
    int prec = precedence(e.kind());
    bool parens = prec < min_prec;
    if (parens) out += '(';
    switch (e.kind()) {
        case K::Constant: out += format_double(e.constant_value()); break;
        case K::Variable: out += 't'; break;
        case K::Sum:
            print_node(e.child(0), 1, out);
            out += '+';
            print_node(e.child(1), 2, out);
            break;
        case K::Difference:
            print_node(e.child(0), 1, out);
            out += '-';
            print_node(e.child(1), 2, out);
            break;
        case K::Product:
            print_node(e.child(0), 2, out);
            out += '*';
            print_node(e.child(1), 3, out);
            break;
        case K::Quotient:
            print_node(e.child(0), 2, out);
            out += '/';
            print_node(e.child(1), 3, out);
            break;
        case K::Power:
            print_node(e.child(0), 4, out);
            out += '^';
            if (e.exponent() < 0)
                out += "(" + std::to_string(e.exponent()) + ")";
            else
                out += std::to_string(e.exponent());
            break;
        case K::Negate:
            out += '-';
            print_node(e.child(0), 4, out);
            break;
        case K::Exp:
        case K::Sin:
        case K::Cos:
            out += (e.kind() == K::Exp ? "exp" : e.kind() == K::Sin ? "sin" : "cos");
            out += '(';
            print_node(e.child(0), 1, out);
            out += ')';
            break;
    }
    if (parens) out += ')';
}

}  // namespace

std::string Expr::text() const {
    std::string out;
    print_node(*this, 0, out);
    return out;
}

bool Expr::structurally_equal(const Expr& other) const {
    if (kind() != other.kind()) return false;
    switch (kind()) {
        case Kind::Constant: return constant_value() == other.constant_value();
        case Kind::Variable: return true;
        case Kind::Power:
            return exponent() == other.exponent() && child(0).structurally_equal(other.child(0));
        case Kind::Negate:
        case Kind::Exp:
        case Kind::Sin:
        case Kind::Cos: return child(0).structurally_equal(other.child(0));
        default:
            return child(0).structurally_equal(other.child(0)) &&
                   child(1).structurally_equal(other.child(1));
    }
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    Expr run() {
        Expr e = parse_sum();
        skip_ws();
        if (pos_ < text_.size())
            throw ParseError(pos_, "end of input", describe_here());
        return e;
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool at_end() {
        skip_ws();
        return pos_ >= text_.size();
    }

    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    bool consume(char c) {
        if (peek() == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    std::string describe_here() const {
        if (pos_ >= text_.size()) return "end of input";
        return std::string("'") + text_[pos_] + "'";
    }

    Expr parse_sum() {
        Expr e = parse_term();
        for (;;) {
            if (consume('+'))
                e = raw_binary(Expr::Kind::Sum, e, parse_term());
            else if (consume('-'))
                e = raw_binary(Expr::Kind::Difference, e, parse_term());
            else
                return e;
        }
    }

    Expr parse_term() {
        Expr e = parse_power();
        for (;;) {
            if (consume('*'))
                e = raw_binary(Expr::Kind::Product, e, parse_power());
            else if (consume('/'))
                e = raw_binary(Expr::Kind::Quotient, e, parse_power());
            else
                return e;
        }
    }

    Expr parse_power() {
        Expr e = parse_unary();
        while (consume('^')) e = Expr::power(e, parse_int_exponent());
        return e;
    }

    Expr parse_unary() {
        if (consume('-')) {
            Expr inner = parse_unary();
            // Fold a negated literal so "-2" reads as the constant -2.
            if (inner.kind() == Expr::Kind::Constant)
                return Expr::constant(-inner.constant_value());
            return raw_unary(Expr::Kind::Negate, inner);
        }
        return parse_atom();
    }

    Expr parse_atom() {
        skip_ws();
        if (pos_ >= text_.size()) throw ParseError(pos_, "expression", "end of input");
        char c = text_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c))) return parse_identifier();
        if (c == '(') {
            ++pos_;
            Expr e = parse_sum();
            if (!consume(')')) throw ParseError(pos_, "')'", describe_here());
            return e;
        }
        throw ParseError(pos_, "expression", describe_here());
    }

    Expr parse_number() {
        double value = 0.0;
        const char* begin = text_.data() + pos_;
        const char* end = text_.data() + text_.size();
        auto res = std::from_chars(begin, end, value);
        if (res.ec != std::errc{}) throw ParseError(pos_, "number", describe_here());
        pos_ = static_cast<std::size_t>(res.ptr - text_.data());
        return Expr::constant(value);
    }

    Expr parse_identifier() {
        std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        std::string name(text_.substr(start, pos_ - start));
        if (name == "t") return Expr::variable();
        if (name == "pi") return Expr::constant(std::numbers::pi);
        if (name == "e") return Expr::constant(std::numbers::e);
        if (name == "exp" || name == "sin" || name == "cos") {
            if (!consume('(')) throw ParseError(pos_, "'('", describe_here());
            Expr arg = parse_sum();
            if (!consume(')')) throw ParseError(pos_, "')'", describe_here());
            if (name == "exp") return raw_unary(Expr::Kind::Exp, arg);
            if (name == "sin") return raw_unary(Expr::Kind::Sin, arg);
            return raw_unary(Expr::Kind::Cos, arg);
        }
        throw ParseError(start, "known identifier", "'" + name + "'");
    }

    int parse_int_exponent() {
        skip_ws();
        std::size_t start = pos_;
        bool parens = consume('(');
        bool neg = consume('-');
        skip_ws();
        if (pos_ >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_])))
            throw ParseError(pos_, "integer exponent", describe_here());
        long value = 0;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
            value = value * 10 + (text_[pos_] - '0');
            if (value > std::numeric_limits<int>::max())
                throw ParseError(start, "integer exponent in range", "overflow");
            ++pos_;
        }
        if (pos_ < text_.size() && (text_[pos_] == '.' || text_[pos_] == 'e' || text_[pos_] == 'E'))
            throw ParseError(pos_, "integer exponent", "fractional exponent");
        if (parens && !consume(')')) throw ParseError(pos_, "')'", describe_here());
        return static_cast<int>(neg ? -value : value);
    }

    // Raw constructors bypass folding so a parsed tree mirrors the input text.
    static Expr raw_binary(Expr::Kind k, const Expr& a, const Expr& b) {
        auto n = std::make_shared<Expr::Node>();
        n->kind = k;
        n->a = a.node_;
        n->b = b.node_;
        return Expr(std::move(n));
    }

    static Expr raw_unary(Expr::Kind k, const Expr& a) {
        auto n = std::make_shared<Expr::Node>();
        n->kind = k;
        n->a = a.node_;
        return Expr(std::move(n));
    }
};

Expr parse_expr(std::string_view text) {
    return Parser(text).run();
}

}  // namespace nmmix
