#pragma once

#include <memory>
#include <string>
#include <string_view>

#include "nmmix/errors.hpp"

namespace nmmix {

// Immutable closed-form expression in the single variable t.
//
// The grammar is deliberately small: constants, t, the four arithmetic
// operations, unary minus, integer powers, and exp/sin/cos. It is closed
// under differentiation, which is what the rest of the library relies on.
class Expr {
public:
    enum class Kind {
        Constant,
        Variable,
        Sum,
        Difference,
        Product,
        Quotient,
        Negate,
        Power,
        Exp,
        Sin,
        Cos,
    };

    Expr() : Expr(constant(0.0)) {}

    static Expr constant(double value);
    static Expr variable();
    static Expr sum(Expr a, Expr b);
    static Expr difference(Expr a, Expr b);
    static Expr product(Expr a, Expr b);
    static Expr quotient(Expr a, Expr b);
    static Expr negate(Expr a);
    static Expr power(Expr base, int exponent);
    static Expr exp(Expr a);
    static Expr sin(Expr a);
    static Expr cos(Expr a);

    Kind kind() const { return node_->kind; }
    double constant_value() const { return node_->value; }
    int exponent() const { return node_->exponent; }
    Expr child(int i) const;

    // Value at t. Throws std::domain_error at quotient poles (and whenever
    // the arithmetic fails to produce a finite number).
    double eval(double t) const;

    // Analytic derivative; the grammar is closed under this operation.
    Expr derivative() const;

    // Text form that parses back to a structurally identical tree.
    std::string text() const;

    bool structurally_equal(const Expr& other) const;

private:
    struct Node {
        Kind kind;
        double value = 0.0;  // Constant
        int exponent = 0;    // Power
        std::shared_ptr<const Node> a, b;
    };

    explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

    std::shared_ptr<const Node> node_;

    friend class Parser;
};

// Parses an expression string. Whitespace-insensitive. Standard precedence:
// unary minus > power > product/quotient > sum/difference; parentheses;
// function application name(arg); named constants pi and e.
Expr parse_expr(std::string_view text);

}  // namespace nmmix
