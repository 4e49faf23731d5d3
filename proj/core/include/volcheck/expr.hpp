#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>

namespace volcheck::expr {

enum class UnaryOp { Neg, Sin, Cos, Exp, Log, Sqrt, Abs, Sign };
enum class BinaryOp { Add, Sub, Mul, Div, Pow };

/// A free variable of a metric formula: index 0 is `t`, index k >= 1 is `xk`.
struct Variable {
    int index = 0;

    static constexpr Variable time() { return {0}; }
    static constexpr Variable space(int axis) { return {axis}; }
    bool is_time() const { return index == 0; }
    friend bool operator==(Variable, Variable) = default;
};

/// Immutable expression tree over t, x1..xn. Copies share structure, so an
/// Expr is cheap to pass by value and safe to evaluate from many threads.
class Expr {
public:
    enum class Kind { Constant, Variable, Unary, Binary };

    struct Node;

    /// The constant 0.
    Expr();

    static Expr constant(double value);
    static Expr variable(Variable v);
    static Expr unary(UnaryOp op, Expr operand);
    static Expr binary(BinaryOp op, Expr lhs, Expr rhs);

    Kind kind() const;
    double constant_value() const;  // Kind::Constant only
    Variable variable() const;      // Kind::Variable only
    UnaryOp unary_op() const;       // Kind::Unary only
    BinaryOp binary_op() const;     // Kind::Binary only
    const Expr& operand() const;    // Kind::Unary only
    const Expr& lhs() const;        // Kind::Binary only
    const Expr& rhs() const;        // Kind::Binary only

    bool is_constant(double value) const;
    bool depends_on(Variable v) const;
    bool depends_on_space() const;
    /// Largest variable index referenced (0 when only t or nothing is used).
    int max_variable_index() const;

    /// Evaluates at (t, x). Throws DomainError naming the innermost
    /// subexpression whose value is not finite.
    double evaluate(double t, std::span<const double> x) const;

private:
    explicit Expr(std::shared_ptr<const Node> node);
    std::shared_ptr<const Node> node_;
};

/// Parses `source` with variables t, x1..x`dimension`. Throws ParseError.
///
/// Grammar, loosest binding first:
///   expr   := term (('+' | '-') term)*
///   term   := unary (('*' | '/') unary)*
///   unary  := '-' unary | power
///   power  := base ('^' unary)?          right associative
///   base   := number | ident | ident '(' expr ')' | '(' expr ')'
/// so `-x1^2` is `-(x1^2)` and `2^3^2` is `2^(3^2)`.
Expr parse(std::string_view source, int dimension);

/// Fully parenthesized text. Parsing it back yields an expression that
/// evaluates identically everywhere (constants print in shortest round-trip form).
std::string print(const Expr& e);

/// Symbolic derivative. The result is not simplified beyond folding
/// trivial zeros and ones. d/du abs(u) = sign(u), with sign(0) = 0.
Expr differentiate(const Expr& e, Variable v);

}  // namespace volcheck::expr
