#pragma once

#include <cctype>
#include <cmath>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>

namespace roughlayer {

/// Variables available to configured source expressions.
struct ExprEnv {
    double x1 = 0.0;
    double x2 = 0.0;
    double eps = 0.0;
    double gamma0 = 0.0;
};

namespace detail {

struct ExprNode {
    virtual ~ExprNode() = default;
    virtual double eval(const ExprEnv& e) const = 0;
};

using ExprPtr = std::shared_ptr<const ExprNode>;

struct ConstNode : ExprNode {
    double v;
    explicit ConstNode(double v) : v(v) {}
    double eval(const ExprEnv&) const override { return v; }
};

struct VarNode : ExprNode {
    int which;  // 0:x1 1:x2 2:eps 3:gamma0
    explicit VarNode(int w) : which(w) {}
    double eval(const ExprEnv& e) const override {
        switch (which) {
            case 0: return e.x1;
            case 1: return e.x2;
            case 2: return e.eps;
            default: return e.gamma0;
        }
    }
};

struct UnaryNode : ExprNode {
    double (*fn)(double);
    ExprPtr a;
    UnaryNode(double (*f)(double), ExprPtr a) : fn(f), a(std::move(a)) {}
    double eval(const ExprEnv& e) const override { return fn(a->eval(e)); }
};

struct BinaryNode : ExprNode {
    char op;
    ExprPtr a, b;
    BinaryNode(char op, ExprPtr a, ExprPtr b) : op(op), a(std::move(a)), b(std::move(b)) {}
    double eval(const ExprEnv& e) const override {
        const double x = a->eval(e), y = b->eval(e);
        switch (op) {
            case '+': return x + y;
            case '-': return x - y;
            case '*': return x * y;
            case '/': return x / y;
            default: return std::pow(x, y);
        }
    }
};

/// Recursive-descent parser for the source-expression grammar:
///   expr   := term (('+'|'-') term)*
///   term   := unary (('*'|'/') unary)*
///   unary  := '-' unary | power
///   power  := primary ('^' unary)?
///   primary:= number | variable | function '(' expr ')' | '(' expr ')'
/// Variables: x1, x2, eps, gamma0, pi. Functions: sin cos exp sqrt abs.
class ExprParser {
  public:
    explicit ExprParser(const std::string& text) : s_(text) {}

    ExprPtr parse() {
        ExprPtr e = expr();
        skip_ws();
        if (pos_ != s_.size()) fail("unexpected trailing input");
        return e;
    }

  private:
    const std::string& s_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& msg) const {
        throw std::invalid_argument("expression error at position " + std::to_string(pos_) +
                                    ": " + msg + " in \"" + s_ + "\"");
    }
    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool eat(char c) {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    char peek() {
        skip_ws();
        return pos_ < s_.size() ? s_[pos_] : '\0';
    }

    ExprPtr expr() {
        ExprPtr e = term();
        while (true) {
            if (eat('+'))
                e = std::make_shared<BinaryNode>('+', e, term());
            else if (eat('-'))
                e = std::make_shared<BinaryNode>('-', e, term());
            else
                return e;
        }
    }

    ExprPtr term() {
        ExprPtr e = unary();
        while (true) {
            if (eat('*'))
                e = std::make_shared<BinaryNode>('*', e, unary());
            else if (eat('/'))
                e = std::make_shared<BinaryNode>('/', e, unary());
            else
                return e;
        }
    }

    ExprPtr unary() {
        if (eat('-'))
            return std::make_shared<BinaryNode>('-', std::make_shared<ConstNode>(0.0), unary());
        return power();
    }

    ExprPtr power() {
        ExprPtr e = primary();
        if (eat('^')) e = std::make_shared<BinaryNode>('^', e, unary());
        return e;
    }

    ExprPtr primary() {
        skip_ws();
        if (eat('(')) {
            ExprPtr e = expr();
            if (!eat(')')) fail("expected ')'");
            return e;
        }
        const char c = peek();
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(s_.substr(pos_), &used);
            } catch (const std::exception&) {
                fail("malformed number");
            }
            pos_ += used;
            return std::make_shared<ConstNode>(v);
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos_;
            while (pos_ < s_.size() &&
                   (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
                ++pos_;
            const std::string name = s_.substr(start, pos_ - start);
            if (name == "x1") return std::make_shared<VarNode>(0);
            if (name == "x2") return std::make_shared<VarNode>(1);
            if (name == "eps") return std::make_shared<VarNode>(2);
            if (name == "gamma0") return std::make_shared<VarNode>(3);
            if (name == "pi") return std::make_shared<ConstNode>(M_PI);
            double (*fn)(double) = nullptr;
            if (name == "sin") fn = std::sin;
            else if (name == "cos") fn = std::cos;
            else if (name == "exp") fn = std::exp;
            else if (name == "sqrt") fn = std::sqrt;
            else if (name == "abs") fn = std::fabs;
            if (fn) {
                if (!eat('(')) fail("expected '(' after function " + name);
                ExprPtr arg = expr();
                if (!eat(')')) fail("expected ')'");
                return std::make_shared<UnaryNode>(fn, arg);
            }
            pos_ = start;
            fail("unknown identifier \"" + name + "\"");
        }
        fail("expected number, variable, function or '('");
    }
};

}  // namespace detail

/// Compiled arithmetic expression over (x1, x2, eps, gamma0).
class Expression {
  public:
    Expression() = default;
    explicit Expression(const std::string& text)
        : text_(text), root_(detail::ExprParser(text).parse()) {}

    bool valid() const { return root_ != nullptr; }
    const std::string& text() const { return text_; }

    double operator()(const ExprEnv& env) const {
        if (!root_) throw std::logic_error("Expression: evaluating an empty expression");
        return root_->eval(env);
    }

  private:
    std::string text_;
    detail::ExprPtr root_;
};

inline double evaluate_expression(const std::string& text, const ExprEnv& env) {
    return Expression(text)(env);
}

}  // namespace roughlayer
