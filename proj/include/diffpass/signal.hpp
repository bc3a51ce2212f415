#pragma once

// Input signals u(t) given as expression trees over
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := ['-'] atom
//   atom   := number | 't' | 'pi' | func '(' expr ')' | '(' expr ')'
//   func   := 'sin' | 'cos' | 'exp'
// Whitespace is insignificant. Printing round-trips: parse(str()) rebuilds
// an identical tree. Symbolic d/dt is provided because reference-tracking
// inputs need the derivative of the reference signal.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "diffpass/linalg.hpp"

namespace diffpass {

struct ParseError : std::runtime_error {
    std::size_t offset;  // 0-based position in the input text
    ParseError(const std::string& msg, std::size_t off)
        : std::runtime_error(msg + " at offset " + std::to_string(off)), offset(off) {}
};

class SignalExpr {
  public:
    SignalExpr() : root_(number_node(0.0)) {}

    static SignalExpr parse(const std::string& text);
    static SignalExpr constant(double c) { return SignalExpr(number_node(c)); }
    static SignalExpr time() { return SignalExpr(std::make_shared<const Node>(Kind::time_var)); }
    static SignalExpr pi() { return SignalExpr(std::make_shared<const Node>(Kind::pi_const)); }

    double operator()(double t) const { return eval(root_.get(), t); }
    std::string str() const { return print(root_.get()); }
    SignalExpr derivative() const { return SignalExpr(diff(root_.get())); }

    friend SignalExpr operator+(const SignalExpr& a, const SignalExpr& b) {
        return SignalExpr(binary_node(Kind::add, a.root_, b.root_));
    }
    friend SignalExpr operator-(const SignalExpr& a, const SignalExpr& b) {
        return SignalExpr(binary_node(Kind::sub, a.root_, b.root_));
    }
    friend SignalExpr operator*(const SignalExpr& a, const SignalExpr& b) {
        return SignalExpr(binary_node(Kind::mul, a.root_, b.root_));
    }
    friend SignalExpr operator/(const SignalExpr& a, const SignalExpr& b) {
        return SignalExpr(binary_node(Kind::div, a.root_, b.root_));
    }
    friend SignalExpr operator-(const SignalExpr& a) {
        return SignalExpr(unary_node(Kind::neg, a.root_));
    }
    friend SignalExpr sin(const SignalExpr& a) {
        return SignalExpr(unary_node(Kind::sin_fn, a.root_));
    }
    friend SignalExpr cos(const SignalExpr& a) {
        return SignalExpr(unary_node(Kind::cos_fn, a.root_));
    }
    friend SignalExpr exp(const SignalExpr& a) {
        return SignalExpr(unary_node(Kind::exp_fn, a.root_));
    }

  private:
    enum class Kind { number, time_var, pi_const, neg, add, sub, mul, div, sin_fn, cos_fn, exp_fn };

    struct Node {
        Kind kind;
        double value = 0.0;
        std::shared_ptr<const Node> a, b;
        explicit Node(Kind k) : kind(k) {}
    };
    using NodeP = std::shared_ptr<const Node>;

    explicit SignalExpr(NodeP root) : root_(std::move(root)) {}

    static NodeP number_node(double v) {
        auto n = std::make_shared<Node>(Kind::number);
        n->value = v;
        return n;
    }
    static NodeP unary_node(Kind k, NodeP a) {
        auto n = std::make_shared<Node>(k);
        n->a = std::move(a);
        return n;
    }
    static NodeP binary_node(Kind k, NodeP a, NodeP b) {
        auto n = std::make_shared<Node>(k);
        n->a = std::move(a);
        n->b = std::move(b);
        return n;
    }

    static bool is_zero(const Node* n) { return n->kind == Kind::number && n->value == 0.0; }
    static bool is_one(const Node* n) { return n->kind == Kind::number && n->value == 1.0; }

    static double eval(const Node* n, double t) {
        switch (n->kind) {
            case Kind::number:   return n->value;
            case Kind::time_var: return t;
            case Kind::pi_const: return M_PI;
            case Kind::neg:      return -eval(n->a.get(), t);
            case Kind::add:      return eval(n->a.get(), t) + eval(n->b.get(), t);
            case Kind::sub:      return eval(n->a.get(), t) - eval(n->b.get(), t);
            case Kind::mul:      return eval(n->a.get(), t) * eval(n->b.get(), t);
            case Kind::div:      return eval(n->a.get(), t) / eval(n->b.get(), t);
            case Kind::sin_fn:   return std::sin(eval(n->a.get(), t));
            case Kind::cos_fn:   return std::cos(eval(n->a.get(), t));
            case Kind::exp_fn:   return std::exp(eval(n->a.get(), t));
        }
        return 0.0;  // unreachable
    }

    // Precedence levels used when printing: additive 1, multiplicative 2,
    // atoms (incl. unary minus, which the grammar only allows on atoms) 3.
    static int precedence(const Node* n) {
        switch (n->kind) {
            case Kind::add:
            case Kind::sub: return 1;
            case Kind::mul:
            case Kind::div: return 2;
            case Kind::neg: return 1;  // "-x" reparses as a factor only when isolated
            case Kind::number:
                // A negative literal prints with a leading '-', so it binds
                // like a negation, not like an atom.
                return std::signbit(n->value) ? 1 : 3;
            default:        return 3;
        }
    }

    static std::string print_number(double v) {
        char buf[40];
        for (int prec = 15; prec <= 17; ++prec) {  // shortest digits that round-trip
            std::snprintf(buf, sizeof buf, "%.*g", prec, v);
            double back = 0.0;
            auto res = std::from_chars(buf, buf + std::char_traits<char>::length(buf), back,
                                       std::chars_format::general);
            if (res.ec == std::errc() && back == v) break;
        }
        return buf;
    }

    static std::string print_child(const Node* child, int min_prec) {
        std::string s = print(child);
        if (precedence(child) < min_prec) return "(" + s + ")";
        return s;
    }

    static std::string print(const Node* n) {
        switch (n->kind) {
            case Kind::number:   return print_number(n->value);
            case Kind::time_var: return "t";
            case Kind::pi_const: return "pi";
            case Kind::neg:
                // grammar: factor := '-' atom, so non-atom operands need parens
                return "-" + print_child(n->a.get(), 3);
            case Kind::add:
                return print_child(n->a.get(), 1) + "+" + print_child(n->b.get(), 2);
            case Kind::sub:
                return print_child(n->a.get(), 1) + "-" + print_child(n->b.get(), 2);
            case Kind::mul:
                return print_child(n->a.get(), 2) + "*" + print_child(n->b.get(), 3);
            case Kind::div:
                return print_child(n->a.get(), 2) + "/" + print_child(n->b.get(), 3);
            case Kind::sin_fn: return "sin(" + print(n->a.get()) + ")";
            case Kind::cos_fn: return "cos(" + print(n->a.get()) + ")";
            case Kind::exp_fn: return "exp(" + print(n->a.get()) + ")";
        }
        return {};  // unreachable
    }

    // d/dt with light simplification so derivative trees stay printable.
    static NodeP diff(const Node* n) {
        auto simplify_add = [](NodeP x, NodeP y) -> NodeP {
            if (is_zero(x.get())) return y;
            if (is_zero(y.get())) return x;
            return binary_node(Kind::add, std::move(x), std::move(y));
        };
        auto simplify_mul = [](NodeP x, NodeP y) -> NodeP {
            if (is_zero(x.get()) || is_zero(y.get())) return number_node(0.0);
            if (is_one(x.get())) return y;
            if (is_one(y.get())) return x;
            return binary_node(Kind::mul, std::move(x), std::move(y));
        };
        switch (n->kind) {
            case Kind::number:
            case Kind::pi_const: return number_node(0.0);
            case Kind::time_var: return number_node(1.0);
            case Kind::neg:      return unary_node(Kind::neg, diff(n->a.get()));
            case Kind::add:      return simplify_add(diff(n->a.get()), diff(n->b.get()));
            case Kind::sub: {
                NodeP da = diff(n->a.get()), db = diff(n->b.get());
                if (is_zero(db.get())) return da;
                if (is_zero(da.get())) return unary_node(Kind::neg, std::move(db));
                return binary_node(Kind::sub, std::move(da), std::move(db));
            }
            case Kind::mul:
                return simplify_add(simplify_mul(diff(n->a.get()), n->b),
                                    simplify_mul(n->a, diff(n->b.get())));
            case Kind::div: {
                // (a/b)' = a'/b - a*b'/(b*b)
                NodeP da = diff(n->a.get()), db = diff(n->b.get());
                NodeP first = is_zero(da.get()) ? number_node(0.0)
                                                : binary_node(Kind::div, std::move(da), n->b);
                if (is_zero(db.get())) return first;
                NodeP b2 = binary_node(Kind::mul, n->b, n->b);
                NodeP second = binary_node(Kind::div, simplify_mul(n->a, std::move(db)),
                                           std::move(b2));
                if (is_zero(first.get())) return unary_node(Kind::neg, std::move(second));
                return binary_node(Kind::sub, std::move(first), std::move(second));
            }
            case Kind::sin_fn:
                return simplify_mul(unary_node(Kind::cos_fn, n->a), diff(n->a.get()));
            case Kind::cos_fn:
                return simplify_mul(unary_node(Kind::neg, unary_node(Kind::sin_fn, n->a)),
                                    diff(n->a.get()));
            case Kind::exp_fn:
                return simplify_mul(unary_node(Kind::exp_fn, n->a), diff(n->a.get()));
        }
        return number_node(0.0);  // unreachable
    }

    class Parser {
      public:
        explicit Parser(const std::string& text) : text_(text) {}

        NodeP run() {
            NodeP e = expr();
            skip_ws();
            if (pos_ != text_.size()) throw ParseError("unexpected trailing input", pos_);
            return e;
        }

      private:
        const std::string& text_;
        std::size_t pos_ = 0;

        void skip_ws() {
            while (pos_ < text_.size() &&
                   (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\n' ||
                    text_[pos_] == '\r'))
                ++pos_;
        }
        char peek() {
            skip_ws();
            return pos_ < text_.size() ? text_[pos_] : '\0';
        }
        bool accept(char c) {
            if (peek() == c) { ++pos_; return true; }
            return false;
        }
        void expect(char c, const char* what) {
            if (!accept(c)) throw ParseError(std::string("expected ") + what, pos_);
        }

        NodeP expr() {
            NodeP left = term();
            for (;;) {
                if (accept('+')) left = binary_node(Kind::add, std::move(left), term());
                else if (accept('-')) left = binary_node(Kind::sub, std::move(left), term());
                else return left;
            }
        }

        NodeP term() {
            NodeP left = factor();
            for (;;) {
                if (accept('*')) left = binary_node(Kind::mul, std::move(left), factor());
                else if (accept('/')) left = binary_node(Kind::div, std::move(left), factor());
                else return left;
            }
        }

        NodeP factor() {
            if (accept('-')) return unary_node(Kind::neg, atom());
            return atom();
        }

        NodeP atom() {
            const char c = peek();
            if (c == '(') {
                ++pos_;
                NodeP e = expr();
                expect(')', "')'");
                return e;
            }
            if ((c >= '0' && c <= '9') || c == '.') return number();
            if (c >= 'a' && c <= 'z') return identifier();
            throw ParseError("expected a value", pos_);
        }

        NodeP number() {
            const char* begin = text_.data() + pos_;
            const char* end = text_.data() + text_.size();
            double value = 0.0;
            auto res = std::from_chars(begin, end, value, std::chars_format::general);
            if (res.ec != std::errc() || res.ptr == begin)
                throw ParseError("malformed number", pos_);
            pos_ += static_cast<std::size_t>(res.ptr - begin);
            return number_node(value);
        }

        NodeP identifier() {
            const std::size_t start = pos_;
            while (pos_ < text_.size() && text_[pos_] >= 'a' && text_[pos_] <= 'z') ++pos_;
            const std::string name = text_.substr(start, pos_ - start);
            if (name == "t") return std::make_shared<const Node>(Kind::time_var);
            if (name == "pi") return std::make_shared<const Node>(Kind::pi_const);
            Kind fn;
            if (name == "sin") fn = Kind::sin_fn;
            else if (name == "cos") fn = Kind::cos_fn;
            else if (name == "exp") fn = Kind::exp_fn;
            else throw ParseError("unknown identifier '" + name + "'", start);
            expect('(', "'(' after function name");
            NodeP arg = expr();
            expect(')', "')'");
            return unary_node(fn, std::move(arg));
        }
    };

    NodeP root_;
};

inline SignalExpr SignalExpr::parse(const std::string& text) {
    return SignalExpr(Parser(text).run());
}

// Per-channel signal vectors used throughout the simulator.
using Signals = std::vector<SignalExpr>;

inline Vec eval_signals(const Signals& sigs, double t) {
    Vec out(sigs.size());
    for (std::size_t i = 0; i < sigs.size(); ++i) out[i] = sigs[i](t);
    return out;
}

inline Signals constant_signals(const Vec& values) {
    Signals s;
    s.reserve(values.size());
    for (double v : values) s.push_back(SignalExpr::constant(v));
    return s;
}

}  // namespace diffpass
