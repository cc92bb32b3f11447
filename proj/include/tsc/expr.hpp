#pragma once

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "tsc/errors.hpp"

namespace tsc {

enum class UnaryOp { Neg, Sin, Cos, Exp, Ln, Abs, Sqrt };
enum class BinaryOp { Add, Sub, Mul, Div, Pow };

/// Immutable expression tree over named real variables. Shared subtrees are
/// fine: nodes are never mutated after construction.
class Expr {
    struct Node;
    using NodePtr = std::shared_ptr<const Node>;

    struct Node {
        enum class Kind { Constant, Variable, Unary, Binary } kind;
        double value = 0.0;        // Constant
        std::string name;          // Variable
        UnaryOp uop = UnaryOp::Neg;
        BinaryOp bop = BinaryOp::Add;
        NodePtr a, b;              // operands (Unary uses a)
    };

public:
    Expr() : node_(constant_node(0.0)) {}

    static Expr constant(double v) { return Expr(constant_node(v)); }

    static Expr variable(std::string name) {
        auto n = std::make_shared<Node>();
        n->kind = Node::Kind::Variable;
        n->name = std::move(name);
        return Expr(std::move(n));
    }

    /// Parse an infix formula. `variables` is the set of legal variable
    /// names; any other identifier raises UnknownVariable ("pi" and "e" are
    /// built-in constants unless listed as variables).
    ///
    /// Grammar, loosest to tightest: additive (+,-), multiplicative (*,/),
    /// unary minus, power (^, right-associative and binding tighter than
    /// unary minus, so -x^2 is -(x^2)), atoms (numbers, names, calls,
    /// parentheses). Functions: sin, cos, exp, ln, abs, sqrt.
    static Expr parse(const std::string& text, const std::vector<std::string>& variables) {
        Parser p{text, 0, &variables};
        Expr e = p.parse_additive();
        p.skip_ws();
        if (p.pos != text.size())
            throw SyntaxError("unexpected trailing input", p.pos);
        return e;
    }

    bool is_constant() const { return node_->kind == Node::Kind::Constant; }
    double constant_value() const { return node_->value; }

    /// Evaluate with all variables bound. Domain faults (log of a
    /// non-positive value, division by zero, sqrt of a negative, invalid
    /// powers) raise DomainError rather than returning NaN/inf.
    double eval(const std::map<std::string, double>& env) const {
        return eval_node(node_.get(), [&](const std::string& n) {
            auto it = env.find(n);
            if (it == env.end()) throw UnboundVariable(n);
            return it->second;
        });
    }

    /// Allocation-free single-variable evaluation (the hot path).
    double eval1(const std::string& var, double value) const {
        return eval_node(node_.get(), [&](const std::string& n) {
            if (n == var) return value;
            throw UnboundVariable(n);
        });
    }

    /// Three-variable evaluation, sized for Lagrangians L(t, x, v).
    double eval3(const std::string& n1, double v1, const std::string& n2,
                 double v2, const std::string& n3, double v3) const {
        return eval_node(node_.get(), [&](const std::string& n) {
            if (n == n1) return v1;
            if (n == n2) return v2;
            if (n == n3) return v3;
            throw UnboundVariable(n);
        });
    }

    /// Exact symbolic partial derivative. Lightweight simplification only
    /// (constant folding, identity elements); enough to keep iterated
    /// derivatives from ballooning.
    Expr diff(const std::string& var) const { return Expr(diff_node(node_, var)); }

    /// Substitute  var := -var  without any simplification beyond what the
    /// smart constructors would do on printing. "t^2" becomes "(-t)^2".
    Expr substitute_negate(const std::string& var) const {
        return Expr(subst_neg_node(node_, var));
    }

    /// Collapse -(-u) to u, and (-a)*(-b) / (-a)/(-b) to a*b / a/b,
    /// everywhere. Applied after substitute_negate by the duality
    /// transforms, so dualizing twice restores the original tree exactly.
    Expr normalize_negations() const { return Expr(strip_negneg_node(node_)); }

    /// Infix rendering with minimal parentheses. Numbers print with enough
    /// digits to round-trip exactly.
    std::string to_string() const {
        std::string out;
        print_node(node_.get(), 0, out);
        return out;
    }

    friend bool operator==(const Expr& x, const Expr& y) {
        return node_equal(x.node_.get(), y.node_.get());
    }

private:
    explicit Expr(NodePtr n) : node_(std::move(n)) {}

    static NodePtr constant_node(double v) {
        auto n = std::make_shared<Node>();
        n->kind = Node::Kind::Constant;
        n->value = v;
        return n;
    }

    static NodePtr unary_node(UnaryOp op, NodePtr a) {
        auto n = std::make_shared<Node>();
        n->kind = Node::Kind::Unary;
        n->uop = op;
        n->a = std::move(a);
        return n;
    }

    static NodePtr binary_node(BinaryOp op, NodePtr a, NodePtr b) {
        auto n = std::make_shared<Node>();
        n->kind = Node::Kind::Binary;
        n->bop = op;
        n->a = std::move(a);
        n->b = std::move(b);
        return n;
    }

    static bool is_const(const NodePtr& n, double v) {
        return n->kind == Node::Kind::Constant && n->value == v;
    }

    // --- smart constructors used by diff ---

    static NodePtr mk_neg(NodePtr a) {
        if (a->kind == Node::Kind::Constant) return constant_node(-a->value);
        if (a->kind == Node::Kind::Unary && a->uop == UnaryOp::Neg) return a->a;
        return unary_node(UnaryOp::Neg, std::move(a));
    }

    static NodePtr mk_add(NodePtr a, NodePtr b) {
        if (is_const(a, 0.0)) return b;
        if (is_const(b, 0.0)) return a;
        if (a->kind == Node::Kind::Constant && b->kind == Node::Kind::Constant)
            return constant_node(a->value + b->value);
        return binary_node(BinaryOp::Add, std::move(a), std::move(b));
    }

    static NodePtr mk_sub(NodePtr a, NodePtr b) {
        if (is_const(b, 0.0)) return a;
        if (is_const(a, 0.0)) return mk_neg(std::move(b));
        if (a->kind == Node::Kind::Constant && b->kind == Node::Kind::Constant)
            return constant_node(a->value - b->value);
        return binary_node(BinaryOp::Sub, std::move(a), std::move(b));
    }

    static NodePtr mk_mul(NodePtr a, NodePtr b) {
        if (is_const(a, 0.0) || is_const(b, 0.0)) return constant_node(0.0);
        if (is_const(a, 1.0)) return b;
        if (is_const(b, 1.0)) return a;
        if (a->kind == Node::Kind::Constant && b->kind == Node::Kind::Constant)
            return constant_node(a->value * b->value);
        return binary_node(BinaryOp::Mul, std::move(a), std::move(b));
    }

    static NodePtr mk_div(NodePtr a, NodePtr b) {
        if (is_const(a, 0.0) && !is_const(b, 0.0)) return constant_node(0.0);
        if (is_const(b, 1.0)) return a;
        return binary_node(BinaryOp::Div, std::move(a), std::move(b));
    }

    static NodePtr mk_pow(NodePtr a, NodePtr b) {
        if (is_const(b, 1.0)) return a;
        return binary_node(BinaryOp::Pow, std::move(a), std::move(b));
    }

    // --- evaluation ---

    template <typename Lookup>
    static double eval_node(const Node* n, Lookup&& lookup) {
        switch (n->kind) {
        case Node::Kind::Constant:
            return n->value;
        case Node::Kind::Variable:
            return lookup(n->name);
        case Node::Kind::Unary: {
            const double a = eval_node(n->a.get(), lookup);
            switch (n->uop) {
            case UnaryOp::Neg: return -a;
            case UnaryOp::Sin: return std::sin(a);
            case UnaryOp::Cos: return std::cos(a);
            case UnaryOp::Exp: return std::exp(a);
            case UnaryOp::Ln:
                if (a <= 0.0) throw DomainError("ln of non-positive value");
                return std::log(a);
            case UnaryOp::Abs: return std::fabs(a);
            case UnaryOp::Sqrt:
                if (a < 0.0) throw DomainError("sqrt of negative value");
                return std::sqrt(a);
            }
            break;
        }
        case Node::Kind::Binary: {
            const double a = eval_node(n->a.get(), lookup);
            const double b = eval_node(n->b.get(), lookup);
            switch (n->bop) {
            case BinaryOp::Add: return a + b;
            case BinaryOp::Sub: return a - b;
            case BinaryOp::Mul: return a * b;
            case BinaryOp::Div:
                if (b == 0.0) throw DomainError("division by zero");
                return a / b;
            case BinaryOp::Pow: {
                if (a == 0.0 && b < 0.0) throw DomainError("zero to a negative power");
                if (a < 0.0 && b != std::floor(b))
                    throw DomainError("negative base with non-integer exponent");
                const double r = std::pow(a, b);
                if (!std::isfinite(r)) throw DomainError("power overflow");
                return r;
            }
            }
            break;
        }
        }
        throw InvalidArgument("corrupt expression node");
    }

    // --- differentiation ---

    static NodePtr diff_node(const NodePtr& n, const std::string& var) {
        switch (n->kind) {
        case Node::Kind::Constant:
            return constant_node(0.0);
        case Node::Kind::Variable:
            return constant_node(n->name == var ? 1.0 : 0.0);
        case Node::Kind::Unary: {
            NodePtr da = diff_node(n->a, var);
            switch (n->uop) {
            case UnaryOp::Neg:
                return mk_neg(std::move(da));
            case UnaryOp::Sin:
                return mk_mul(unary_node(UnaryOp::Cos, n->a), std::move(da));
            case UnaryOp::Cos:
                return mk_neg(mk_mul(unary_node(UnaryOp::Sin, n->a), std::move(da)));
            case UnaryOp::Exp:
                return mk_mul(unary_node(UnaryOp::Exp, n->a), std::move(da));
            case UnaryOp::Ln:
                return mk_div(std::move(da), n->a);
            case UnaryOp::Abs:
                // u/|u| * u'; evaluation at u == 0 faults via the division,
                // which is the right answer at a kink.
                return mk_mul(mk_div(n->a, unary_node(UnaryOp::Abs, n->a)), std::move(da));
            case UnaryOp::Sqrt:
                return mk_div(std::move(da),
                              mk_mul(constant_node(2.0), unary_node(UnaryOp::Sqrt, n->a)));
            }
            break;
        }
        case Node::Kind::Binary: {
            switch (n->bop) {
            case BinaryOp::Add:
                return mk_add(diff_node(n->a, var), diff_node(n->b, var));
            case BinaryOp::Sub:
                return mk_sub(diff_node(n->a, var), diff_node(n->b, var));
            case BinaryOp::Mul:
                return mk_add(mk_mul(diff_node(n->a, var), n->b),
                              mk_mul(n->a, diff_node(n->b, var)));
            case BinaryOp::Div:
                return mk_div(mk_sub(mk_mul(diff_node(n->a, var), n->b),
                                     mk_mul(n->a, diff_node(n->b, var))),
                              mk_mul(n->b, n->b));
            case BinaryOp::Pow: {
                if (n->b->kind == Node::Kind::Constant) {
                    // d(u^c) = c*u^(c-1)*u'
                    const double c = n->b->value;
                    return mk_mul(mk_mul(constant_node(c),
                                         mk_pow(n->a, constant_node(c - 1.0))),
                                  diff_node(n->a, var));
                }
                // general u^v = exp(v ln u)
                NodePtr lnu = unary_node(UnaryOp::Ln, n->a);
                NodePtr term = mk_add(mk_mul(diff_node(n->b, var), lnu),
                                      mk_div(mk_mul(n->b, diff_node(n->a, var)), n->a));
                return mk_mul(NodePtr(n), std::move(term));
            }
            }
            break;
        }
        }
        throw InvalidArgument("corrupt expression node");
    }

    // --- substitution var := -var ---

    static NodePtr subst_neg_node(const NodePtr& n, const std::string& var) {
        switch (n->kind) {
        case Node::Kind::Constant:
            return n;
        case Node::Kind::Variable:
            return n->name == var ? unary_node(UnaryOp::Neg, n) : n;
        case Node::Kind::Unary:
            return unary_node(n->uop, subst_neg_node(n->a, var));
        case Node::Kind::Binary:
            return binary_node(n->bop, subst_neg_node(n->a, var),
                               subst_neg_node(n->b, var));
        }
        throw InvalidArgument("corrupt expression node");
    }

    static NodePtr strip_negneg_node(const NodePtr& n) {
        switch (n->kind) {
        case Node::Kind::Constant:
        case Node::Kind::Variable:
            return n;
        case Node::Kind::Unary: {
            NodePtr a = strip_negneg_node(n->a);
            if (n->uop == UnaryOp::Neg && a->kind == Node::Kind::Unary &&
                a->uop == UnaryOp::Neg)
                return a->a;
            return a == n->a ? n : unary_node(n->uop, std::move(a));
        }
        case Node::Kind::Binary: {
            NodePtr a = strip_negneg_node(n->a);
            NodePtr b = strip_negneg_node(n->b);
            const bool both_neg = a->kind == Node::Kind::Unary &&
                                  a->uop == UnaryOp::Neg &&
                                  b->kind == Node::Kind::Unary &&
                                  b->uop == UnaryOp::Neg;
            if (both_neg && (n->bop == BinaryOp::Mul || n->bop == BinaryOp::Div))
                return binary_node(n->bop, a->a, b->a);
            if (a == n->a && b == n->b) return n;
            return binary_node(n->bop, std::move(a), std::move(b));
        }
        }
        throw InvalidArgument("corrupt expression node");
    }

    static bool node_equal(const Node* x, const Node* y) {
        if (x == y) return true;
        if (x->kind != y->kind) return false;
        switch (x->kind) {
        case Node::Kind::Constant:
            return x->value == y->value;
        case Node::Kind::Variable:
            return x->name == y->name;
        case Node::Kind::Unary:
            return x->uop == y->uop && node_equal(x->a.get(), y->a.get());
        case Node::Kind::Binary:
            return x->bop == y->bop && node_equal(x->a.get(), y->a.get()) &&
                   node_equal(x->b.get(), y->b.get());
        }
        return false;
    }

    // --- printing ---
    // Precedence levels: 1 additive, 2 multiplicative, 3 unary minus, 4 power,
    // 5 atom. A child is parenthesized when its level is below the context.

    static int node_level(const Node* n) {
        switch (n->kind) {
        case Node::Kind::Constant:
            return n->value < 0.0 ? 3 : 5;
        case Node::Kind::Variable:
            return 5;
        case Node::Kind::Unary:
            return n->uop == UnaryOp::Neg ? 3 : 5;
        case Node::Kind::Binary:
            switch (n->bop) {
            case BinaryOp::Add:
            case BinaryOp::Sub: return 1;
            case BinaryOp::Mul:
            case BinaryOp::Div: return 2;
            case BinaryOp::Pow: return 4;
            }
        }
        return 5;
    }

    static void print_number(double v, std::string& out) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        // prefer the short form when it round-trips
        char shortbuf[40];
        for (int prec = 1; prec < 17; ++prec) {
            std::snprintf(shortbuf, sizeof shortbuf, "%.*g", prec, v);
            if (std::strtod(shortbuf, nullptr) == v) {
                out += shortbuf;
                return;
            }
        }
        out += buf;
    }

    static void print_node(const Node* n, int context, std::string& out) {
        const int level = node_level(n);
        const bool parens = level < context;
        if (parens) out += '(';
        switch (n->kind) {
        case Node::Kind::Constant:
            print_number(n->value, out);
            break;
        case Node::Kind::Variable:
            out += n->name;
            break;
        case Node::Kind::Unary:
            switch (n->uop) {
            case UnaryOp::Neg:
                out += '-';
                print_node(n->a.get(), 4, out);
                break;
            case UnaryOp::Sin: out += "sin("; print_node(n->a.get(), 0, out); out += ')'; break;
            case UnaryOp::Cos: out += "cos("; print_node(n->a.get(), 0, out); out += ')'; break;
            case UnaryOp::Exp: out += "exp("; print_node(n->a.get(), 0, out); out += ')'; break;
            case UnaryOp::Ln:  out += "ln(";  print_node(n->a.get(), 0, out); out += ')'; break;
            case UnaryOp::Abs: out += "abs("; print_node(n->a.get(), 0, out); out += ')'; break;
            case UnaryOp::Sqrt: out += "sqrt("; print_node(n->a.get(), 0, out); out += ')'; break;
            }
            break;
        case Node::Kind::Binary:
            switch (n->bop) {
            case BinaryOp::Add:
                print_node(n->a.get(), 1, out);
                out += " + ";
                print_node(n->b.get(), 2, out);
                break;
            case BinaryOp::Sub:
                print_node(n->a.get(), 1, out);
                out += " - ";
                print_node(n->b.get(), 2, out);
                break;
            case BinaryOp::Mul:
                print_node(n->a.get(), 2, out);
                out += '*';
                print_node(n->b.get(), 3, out);
                break;
            case BinaryOp::Div:
                print_node(n->a.get(), 2, out);
                out += '/';
                print_node(n->b.get(), 3, out);
                break;
            case BinaryOp::Pow:
                // right-associative: left child needs a level above 4
                print_node(n->a.get(), 5, out);
                out += '^';
                print_node(n->b.get(), 4, out);
                break;
            }
            break;
        }
        if (parens) out += ')';
    }

    // --- parser ---

    struct Parser {
        const std::string& text;
        std::size_t pos;
        const std::vector<std::string>* variables;

        void skip_ws() {
            while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos])))
                ++pos;
        }

        bool eat(char c) {
            skip_ws();
            if (pos < text.size() && text[pos] == c) {
                ++pos;
                return true;
            }
            return false;
        }

        char peek() {
            skip_ws();
            return pos < text.size() ? text[pos] : '\0';
        }

        Expr parse_additive() {
            Expr lhs = parse_multiplicative();
            for (;;) {
                if (eat('+')) {
                    Expr rhs = parse_multiplicative();
                    lhs = Expr(binary_node(BinaryOp::Add, lhs.node_, rhs.node_));
                } else if (eat('-')) {
                    Expr rhs = parse_multiplicative();
                    lhs = Expr(binary_node(BinaryOp::Sub, lhs.node_, rhs.node_));
                } else {
                    return lhs;
                }
            }
        }

        Expr parse_multiplicative() {
            Expr lhs = parse_unary();
            for (;;) {
                if (eat('*')) {
                    Expr rhs = parse_unary();
                    lhs = Expr(binary_node(BinaryOp::Mul, lhs.node_, rhs.node_));
                } else if (eat('/')) {
                    Expr rhs = parse_unary();
                    lhs = Expr(binary_node(BinaryOp::Div, lhs.node_, rhs.node_));
                } else {
                    return lhs;
                }
            }
        }

        Expr parse_unary() {
            if (eat('-')) {
                Expr operand = parse_unary();
                return Expr(unary_node(UnaryOp::Neg, operand.node_));
            }
            return parse_power();
        }

        Expr parse_power() {
            Expr base = parse_atom();
            if (eat('^')) {
                // right-associative; exponent may carry its own unary minus
                Expr exponent = parse_unary();
                return Expr(binary_node(BinaryOp::Pow, base.node_, exponent.node_));
            }
            return base;
        }

        Expr parse_atom() {
            skip_ws();
            if (pos >= text.size()) throw SyntaxError("unexpected end of input", pos);
            const char c = text[pos];
            if (c == '(') {
                ++pos;
                Expr inner = parse_additive();
                if (!eat(')')) throw SyntaxError("expected ')'", pos);
                return inner;
            }
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
                return parse_number();
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_')
                return parse_name();
            throw SyntaxError(std::string("unexpected character '") + c + "'", pos);
        }

        Expr parse_number() {
            const char* start = text.c_str() + pos;
            char* end = nullptr;
            const double v = std::strtod(start, &end);
            if (end == start) throw SyntaxError("malformed number", pos);
            pos += static_cast<std::size_t>(end - start);
            return Expr(constant_node(v));
        }

        Expr parse_name() {
            const std::size_t start = pos;
            while (pos < text.size() &&
                   (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_'))
                ++pos;
            const std::string name = text.substr(start, pos - start);
            skip_ws();
            if (pos < text.size() && text[pos] == '(') {
                ++pos;
                Expr arg = parse_additive();
                if (!eat(')')) throw SyntaxError("expected ')'", pos);
                if (name == "sin") return Expr(unary_node(UnaryOp::Sin, arg.node_));
                if (name == "cos") return Expr(unary_node(UnaryOp::Cos, arg.node_));
                if (name == "exp") return Expr(unary_node(UnaryOp::Exp, arg.node_));
                if (name == "ln") return Expr(unary_node(UnaryOp::Ln, arg.node_));
                if (name == "abs") return Expr(unary_node(UnaryOp::Abs, arg.node_));
                if (name == "sqrt") return Expr(unary_node(UnaryOp::Sqrt, arg.node_));
                throw SyntaxError("unknown function '" + name + "'", start);
            }
            for (const std::string& v : *variables)
                if (v == name) return Expr::variable(name);
            if (name == "pi") return Expr::constant(3.14159265358979323846);
            if (name == "e") return Expr::constant(2.71828182845904523536);
            throw UnknownVariable(name);
        }
    };

    NodePtr node_;
};

} // namespace tsc
