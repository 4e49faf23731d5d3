#include "volcheck/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <utility>

#include "volcheck/errors.hpp"

namespace volcheck::expr {

struct Expr::Node {
    Kind kind = Kind::Constant;
    double value = 0.0;
    Variable var{};
    UnaryOp uop = UnaryOp::Neg;
    BinaryOp bop = BinaryOp::Add;
    Expr a{std::shared_ptr<const Node>{}};
    Expr b{std::shared_ptr<const Node>{}};
    // Bit k set when variable k occurs; variables beyond 63 share the top bit.
    std::uint64_t uses = 0;
    int max_index = 0;
};

namespace {

std::uint64_t variable_bit(int index) { return std::uint64_t{1} << (index < 63 ? index : 63); }

}  // namespace

Expr::Expr() : Expr(constant(0.0)) {}

Expr::Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

Expr Expr::constant(double value) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Constant;
    n->value = value;
    return Expr(std::move(n));
}

Expr Expr::variable(Variable v) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Variable;
    n->var = v;
    n->uses = variable_bit(v.index);
    n->max_index = v.index;
    return Expr(std::move(n));
}

Expr Expr::unary(UnaryOp op, Expr operand) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Unary;
    n->uop = op;
    n->uses = operand.node_->uses;
    n->max_index = operand.node_->max_index;
    n->a = std::move(operand);
    return Expr(std::move(n));
}

Expr Expr::binary(BinaryOp op, Expr lhs, Expr rhs) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Binary;
    n->bop = op;
    n->uses = lhs.node_->uses | rhs.node_->uses;
    n->max_index = std::max(lhs.node_->max_index, rhs.node_->max_index);
    n->a = std::move(lhs);
    n->b = std::move(rhs);
    return Expr(std::move(n));
}

Expr::Kind Expr::kind() const { return node_->kind; }
double Expr::constant_value() const { return node_->value; }
Variable Expr::variable() const { return node_->var; }
UnaryOp Expr::unary_op() const { return node_->uop; }
BinaryOp Expr::binary_op() const { return node_->bop; }
const Expr& Expr::operand() const { return node_->a; }
const Expr& Expr::lhs() const { return node_->a; }
const Expr& Expr::rhs() const { return node_->b; }

bool Expr::is_constant(double value) const {
    return node_->kind == Kind::Constant && node_->value == value;
}

bool Expr::depends_on(Variable v) const {
    if (v.index >= 63) return max_variable_index() >= v.index;
    return (node_->uses & variable_bit(v.index)) != 0;
}

bool Expr::depends_on_space() const { return (node_->uses & ~std::uint64_t{1}) != 0; }

int Expr::max_variable_index() const { return node_->max_index; }

// ---------------------------------------------------------------------------
// Evaluation

namespace {

double apply(UnaryOp op, double u) {
    switch (op) {
        case UnaryOp::Neg: return -u;
        case UnaryOp::Sin: return std::sin(u);
        case UnaryOp::Cos: return std::cos(u);
        case UnaryOp::Exp: return std::exp(u);
        case UnaryOp::Log: return std::log(u);
        case UnaryOp::Sqrt: return std::sqrt(u);
        case UnaryOp::Abs: return std::fabs(u);
        case UnaryOp::Sign: return static_cast<double>((u > 0.0) - (u < 0.0));
    }
    return u;
}

double apply(BinaryOp op, double u, double v) {
    switch (op) {
        case BinaryOp::Add: return u + v;
        case BinaryOp::Sub: return u - v;
        case BinaryOp::Mul: return u * v;
        case BinaryOp::Div: return u / v;
        case BinaryOp::Pow: return std::pow(u, v);
    }
    return u;
}

double eval_node(const Expr& e, double t, std::span<const double> x) {
    double result = 0.0;
    switch (e.kind()) {
        case Expr::Kind::Constant:
            return e.constant_value();
        case Expr::Kind::Variable: {
            const int k = e.variable().index;
            if (k == 0) return t;
            if (static_cast<std::size_t>(k) > x.size()) {
                throw DomainError(print(e), "point has only " + std::to_string(x.size()) +
                                                " spatial coordinates");
            }
            return x[static_cast<std::size_t>(k - 1)];
        }
        case Expr::Kind::Unary:
            result = apply(e.unary_op(), eval_node(e.operand(), t, x));
            break;
        case Expr::Kind::Binary: {
            const double u = eval_node(e.lhs(), t, x);
            const double v = eval_node(e.rhs(), t, x);
            if (e.binary_op() == BinaryOp::Div && v == 0.0) {
                throw DomainError(print(e), "division by zero");
            }
            result = apply(e.binary_op(), u, v);
            break;
        }
    }
    if (!std::isfinite(result)) throw DomainError(print(e), "non-finite value");
    return result;
}

}  // namespace

double Expr::evaluate(double t, std::span<const double> x) const { return eval_node(*this, t, x); }

// ---------------------------------------------------------------------------
// Printing

namespace {

const char* function_name(UnaryOp op) {
    switch (op) {
        case UnaryOp::Sin: return "sin";
        case UnaryOp::Cos: return "cos";
        case UnaryOp::Exp: return "exp";
        case UnaryOp::Log: return "log";
        case UnaryOp::Sqrt: return "sqrt";
        case UnaryOp::Abs: return "abs";
        case UnaryOp::Sign: return "sign";
        case UnaryOp::Neg: break;
    }
    return "";
}

char operator_symbol(BinaryOp op) {
    switch (op) {
        case BinaryOp::Add: return '+';
        case BinaryOp::Sub: return '-';
        case BinaryOp::Mul: return '*';
        case BinaryOp::Div: return '/';
        case BinaryOp::Pow: return '^';
    }
    return '?';
}

void print_into(const Expr& e, std::string& out) {
    switch (e.kind()) {
        case Expr::Kind::Constant: {
            const double v = e.constant_value();
            char buf[64];
            auto [end, ec] = std::to_chars(buf, buf + sizeof buf, std::fabs(v));
            (void)ec;
            if (std::signbit(v)) {
                out += "(-";
                out.append(buf, end);
                out += ')';
            } else {
                out.append(buf, end);
            }
            return;
        }
        case Expr::Kind::Variable:
            if (e.variable().is_time()) {
                out += 't';
            } else {
                out += 'x';
                out += std::to_string(e.variable().index);
            }
            return;
        case Expr::Kind::Unary:
            if (e.unary_op() == UnaryOp::Neg) {
                out += "(-";
                print_into(e.operand(), out);
                out += ')';
            } else {
                out += function_name(e.unary_op());
                out += '(';
                print_into(e.operand(), out);
                out += ')';
            }
            return;
        case Expr::Kind::Binary:
            out += '(';
            print_into(e.lhs(), out);
            out += ' ';
            out += operator_symbol(e.binary_op());
            out += ' ';
            print_into(e.rhs(), out);
            out += ')';
            return;
    }
}

}  // namespace

std::string print(const Expr& e) {
    std::string out;
    print_into(e, out);
    return out;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

class Parser {
public:
    Parser(std::string_view src, int dimension) : src_(src), dimension_(dimension) {}

    Expr parse_all() {
        Expr e = parse_expr();
        skip_space();
        if (pos_ < src_.size()) fail("unexpected character '" + std::string(1, src_[pos_]) + "'",
                                     "operator or end of input");
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& message, const std::string& expected) const {
        fail_at(pos_, message, expected);
    }

    [[noreturn]] void fail_at(std::size_t at, const std::string& message,
                              const std::string& expected) const {
        const std::size_t clamped = src_.empty() ? 0 : std::min(at, src_.size() - 1);
        throw ParseError(clamped, message, expected);
    }

    void skip_space() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_space();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    Expr parse_expr() {
        Expr lhs = parse_term();
        for (;;) {
            if (accept('+')) {
                lhs = Expr::binary(BinaryOp::Add, std::move(lhs), parse_term());
            } else if (accept('-')) {
                lhs = Expr::binary(BinaryOp::Sub, std::move(lhs), parse_term());
            } else {
                return lhs;
            }
        }
    }

    Expr parse_term() {
        Expr lhs = parse_unary();
        for (;;) {
            if (accept('*')) {
                lhs = Expr::binary(BinaryOp::Mul, std::move(lhs), parse_unary());
            } else if (accept('/')) {
                lhs = Expr::binary(BinaryOp::Div, std::move(lhs), parse_unary());
            } else {
                return lhs;
            }
        }
    }

    Expr parse_unary() {
        if (accept('-')) return Expr::unary(UnaryOp::Neg, parse_unary());
        return parse_power();
    }

    Expr parse_power() {
        Expr base = parse_base();
        if (accept('^')) return Expr::binary(BinaryOp::Pow, std::move(base), parse_unary());
        return base;
    }

    Expr parse_base() {
        skip_space();
        if (pos_ >= src_.size()) fail("unexpected end of input", "number, identifier or '('");
        const char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            Expr inner = parse_expr();
            if (!accept(')')) fail("unbalanced parenthesis", "')'");
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
        fail("unexpected character '" + std::string(1, c) + "'", "number, identifier or '('");
    }

    Expr parse_number() {
        const std::size_t start = pos_;
        auto digits = [&] {
            std::size_t n = 0;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                ++pos_;
                ++n;
            }
            return n;
        };
        std::size_t mantissa = digits();
        if (pos_ < src_.size() && src_[pos_] == '.') {
            ++pos_;
            mantissa += digits();
        }
        if (mantissa == 0) fail_at(start, "malformed number", "digit");
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            const std::size_t save = pos_;
            ++pos_;
            if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
            if (digits() == 0) pos_ = save;  // bare `e` is not an exponent
        }
        double value = 0.0;
        const char* first = src_.data() + start;
        const char* last = src_.data() + pos_;
        auto [ptr, ec] = std::from_chars(first, last, value);
        if (ec != std::errc{} || ptr != last) fail_at(start, "malformed number", "number");
        return Expr::constant(value);
    }

    Expr parse_identifier() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
            ++pos_;
        }
        const std::string_view name = src_.substr(start, pos_ - start);

        if (name == "t") return Expr::variable(Variable::time());
        if (name == "pi") return Expr::constant(std::numbers::pi);
        if (name == "e") return Expr::constant(std::numbers::e);
        if (name.size() >= 2 && name[0] == 'x') {
            int axis = 0;
            auto [ptr, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), axis);
            if (ec == std::errc{} && ptr == name.data() + name.size() && name[1] != '0') {
                if (axis < 1 || axis > dimension_) {
                    fail_at(start,
                            "variable " + std::string(name) + " exceeds spatial dimension " +
                                std::to_string(dimension_),
                            dimension_ >= 1 ? "t or x1..x" + std::to_string(dimension_) : "t");
                }
                return Expr::variable(Variable::space(axis));
            }
        }

        static constexpr std::pair<std::string_view, UnaryOp> functions[] = {
            {"sin", UnaryOp::Sin},   {"cos", UnaryOp::Cos}, {"exp", UnaryOp::Exp},
            {"log", UnaryOp::Log},   {"sqrt", UnaryOp::Sqrt}, {"abs", UnaryOp::Abs},
            {"sign", UnaryOp::Sign},
        };
        for (const auto& [fname, op] : functions) {
            if (name == fname) {
                if (!accept('(')) fail("function " + std::string(name) + " needs an argument", "'('");
                Expr arg = parse_expr();
                if (!accept(')')) fail("unbalanced parenthesis", "')'");
                return Expr::unary(op, std::move(arg));
            }
        }
        fail_at(start, "unknown identifier '" + std::string(name) + "'",
                "t, x1..xn, pi, e or a function name");
    }

    std::string_view src_;
    int dimension_;
    std::size_t pos_ = 0;
};

}  // namespace

Expr parse(std::string_view source, int dimension) { return Parser(source, dimension).parse_all(); }

// ---------------------------------------------------------------------------
// Differentiation

namespace {

bool is_const(const Expr& e) { return e.kind() == Expr::Kind::Constant; }

Expr neg(Expr a) {
    if (is_const(a)) return Expr::constant(-a.constant_value());
    if (a.kind() == Expr::Kind::Unary && a.unary_op() == UnaryOp::Neg) return a.operand();
    return Expr::unary(UnaryOp::Neg, std::move(a));
}

Expr add(Expr a, Expr b) {
    if (a.is_constant(0.0)) return b;
    if (b.is_constant(0.0)) return a;
    if (is_const(a) && is_const(b)) return Expr::constant(a.constant_value() + b.constant_value());
    return Expr::binary(BinaryOp::Add, std::move(a), std::move(b));
}

Expr sub(Expr a, Expr b) {
    if (b.is_constant(0.0)) return a;
    if (a.is_constant(0.0)) return neg(std::move(b));
    if (is_const(a) && is_const(b)) return Expr::constant(a.constant_value() - b.constant_value());
    return Expr::binary(BinaryOp::Sub, std::move(a), std::move(b));
}

Expr mul(Expr a, Expr b) {
    if (a.is_constant(0.0) || b.is_constant(0.0)) return Expr::constant(0.0);
    if (a.is_constant(1.0)) return b;
    if (b.is_constant(1.0)) return a;
    if (is_const(a) && is_const(b)) return Expr::constant(a.constant_value() * b.constant_value());
    return Expr::binary(BinaryOp::Mul, std::move(a), std::move(b));
}

Expr div(Expr a, Expr b) {
    if (a.is_constant(0.0)) return Expr::constant(0.0);
    if (b.is_constant(1.0)) return a;
    return Expr::binary(BinaryOp::Div, std::move(a), std::move(b));
}

Expr pow(Expr a, Expr b) {
    if (b.is_constant(1.0)) return a;
    if (b.is_constant(0.0)) return Expr::constant(1.0);
    return Expr::binary(BinaryOp::Pow, std::move(a), std::move(b));
}

Expr fn(UnaryOp op, Expr a) { return Expr::unary(op, std::move(a)); }

}  // namespace

Expr differentiate(const Expr& e, Variable v) {
    if (!e.depends_on(v)) return Expr::constant(0.0);

    switch (e.kind()) {
        case Expr::Kind::Constant:
            return Expr::constant(0.0);
        case Expr::Kind::Variable:
            return Expr::constant(e.variable() == v ? 1.0 : 0.0);
        case Expr::Kind::Unary: {
            const Expr& u = e.operand();
            Expr du = differentiate(u, v);
            switch (e.unary_op()) {
                case UnaryOp::Neg: return neg(std::move(du));
                case UnaryOp::Sin: return mul(fn(UnaryOp::Cos, u), std::move(du));
                case UnaryOp::Cos: return neg(mul(fn(UnaryOp::Sin, u), std::move(du)));
                case UnaryOp::Exp: return mul(e, std::move(du));
                case UnaryOp::Log: return div(std::move(du), u);
                case UnaryOp::Sqrt: return div(std::move(du), mul(Expr::constant(2.0), e));
                case UnaryOp::Abs: return mul(fn(UnaryOp::Sign, u), std::move(du));
                case UnaryOp::Sign: return Expr::constant(0.0);
            }
            break;
        }
        case Expr::Kind::Binary: {
            const Expr& a = e.lhs();
            const Expr& b = e.rhs();
            switch (e.binary_op()) {
                case BinaryOp::Add: return add(differentiate(a, v), differentiate(b, v));
                case BinaryOp::Sub: return sub(differentiate(a, v), differentiate(b, v));
                case BinaryOp::Mul:
                    return add(mul(differentiate(a, v), b), mul(a, differentiate(b, v)));
                case BinaryOp::Div:
                    return sub(div(differentiate(a, v), b),
                               div(mul(a, differentiate(b, v)), mul(b, b)));
                case BinaryOp::Pow: {
                    if (!b.depends_on(v)) {
                        // b * a^(b-1) * a'
                        Expr exponent = sub(b, Expr::constant(1.0));
                        return mul(mul(b, pow(a, std::move(exponent))), differentiate(a, v));
                    }
                    if (!a.depends_on(v)) {
                        return mul(mul(e, fn(UnaryOp::Log, a)), differentiate(b, v));
                    }
                    // a^b * (b' log a + b a' / a)
                    return mul(e, add(mul(differentiate(b, v), fn(UnaryOp::Log, a)),
                                      div(mul(b, differentiate(a, v)), a)));
                }
            }
            break;
        }
    }
    return Expr::constant(0.0);
}

}  // namespace volcheck::expr
