#include "cgo/expr.hpp"

#include <cctype>
#include <cmath>
#include <set>
#include <sstream>

namespace cgo {

namespace {

struct Token {
    enum Kind { Number, Ident, Op, LParen, RParen, End } kind = End;
    std::string text;
    double number = 0.0;
    int pos = 0; // 0-based offset into the input
};

class Lexer {
public:
    explicit Lexer(const std::string& s) : s_(s) {}

    Token next() {
        skip_ws();
        Token tok;
        tok.pos = int(i_);
        if (i_ >= s_.size()) {
            tok.kind = Token::End;
            return tok;
        }
        const char c = s_[i_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            size_t j = i_;
            while (j < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[j])) || s_[j] == '.')) ++j;
            // exponent part
            if (j < s_.size() && (s_[j] == 'e' || s_[j] == 'E')) {
                size_t k = j + 1;
                if (k < s_.size() && (s_[k] == '+' || s_[k] == '-')) ++k;
                if (k < s_.size() && std::isdigit(static_cast<unsigned char>(s_[k]))) {
                    ++k;
                    while (k < s_.size() && std::isdigit(static_cast<unsigned char>(s_[k]))) ++k;
                    j = k;
                }
            }
            tok.kind = Token::Number;
            tok.text = s_.substr(i_, j - i_);
            try {
                tok.number = std::stod(tok.text);
            } catch (...) {
                throw_at(i_, "malformed number '" + tok.text + "'");
            }
            i_ = j;
            return tok;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t j = i_;
            while (j < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[j])) || s_[j] == '_')) ++j;
            tok.kind = Token::Ident;
            tok.text = s_.substr(i_, j - i_);
            i_ = j;
            return tok;
        }
        if (c == '(') { tok.kind = Token::LParen; tok.text = "("; ++i_; return tok; }
        if (c == ')') { tok.kind = Token::RParen; tok.text = ")"; ++i_; return tok; }
        if (c == '+' || c == '-' || c == '*' || c == '/' || c == '^') {
            tok.kind = Token::Op;
            tok.text = std::string(1, c);
            ++i_;
            return tok;
        }
        throw_at(i_, std::string("unexpected character '") + c + "'");
        return tok; // unreachable
    }

    [[noreturn]] void throw_at(size_t off, const std::string& msg) const {
        int line = 1, col = 1;
        for (size_t k = 0; k < off && k < s_.size(); ++k) {
            if (s_[k] == '\n') { ++line; col = 1; } else ++col;
        }
        throw SyntaxError(msg, line, col);
    }

private:
    const std::string& s_;
    size_t i_ = 0;

    void skip_ws() {
        while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
    }
};

class Parser {
public:
    explicit Parser(const std::string& s) : lex_(s), src_(s) { advance(); }

    ExprPtr parse() {
        ExprPtr e = parse_sum();
        if (cur_.kind != Token::End)
            lex_.throw_at(cur_.pos, "unexpected trailing input '" + cur_.text + "'");
        return e;
    }

private:
    Lexer lex_;
    const std::string& src_;
    Token cur_;

    void advance() { cur_ = lex_.next(); }

    static ExprPtr make(ExprOp op, ExprPtr a = nullptr, ExprPtr b = nullptr) {
        auto n = std::make_shared<ExprNode>();
        n->op = op;
        n->a = std::move(a);
        n->b = std::move(b);
        return n;
    }

    ExprPtr parse_sum() {
        ExprPtr e = parse_term();
        while (cur_.kind == Token::Op && (cur_.text == "+" || cur_.text == "-")) {
            const bool add = cur_.text == "+";
            advance();
            ExprPtr r = parse_term();
            e = make(add ? ExprOp::Add : ExprOp::Sub, e, r);
        }
        return e;
    }

    ExprPtr parse_term() {
        ExprPtr e = parse_factor();
        while (cur_.kind == Token::Op && (cur_.text == "*" || cur_.text == "/")) {
            const bool mul = cur_.text == "*";
            advance();
            ExprPtr r = parse_factor();
            e = make(mul ? ExprOp::Mul : ExprOp::Div, e, r);
        }
        return e;
    }

    ExprPtr parse_factor() {
        if (cur_.kind == Token::Op && (cur_.text == "-" || cur_.text == "+")) {
            const bool neg = cur_.text == "-";
            advance();
            ExprPtr e = parse_factor();
            return neg ? make(ExprOp::Neg, e) : e;
        }
        return parse_power();
    }

    ExprPtr parse_power() {
        ExprPtr base = parse_atom();
        if (cur_.kind == Token::Op && cur_.text == "^") {
            const int op_pos = cur_.pos;
            advance();
            bool neg = false;
            if (cur_.kind == Token::Op && (cur_.text == "-" || cur_.text == "+")) {
                neg = cur_.text == "-";
                advance();
            }
            if (cur_.kind != Token::Number)
                lex_.throw_at(cur_.kind == Token::End ? op_pos : cur_.pos,
                              "exponent must be an integer literal");
            double v = cur_.number;
            if (v != std::floor(v))
                lex_.throw_at(cur_.pos, "exponent must be an integer literal");
            advance();
            auto n = std::make_shared<ExprNode>();
            n->op = ExprOp::Pow;
            n->a = base;
            n->ipow = int(neg ? -v : v);
            return n;
        }
        return base;
    }

    ExprPtr parse_atom() {
        if (cur_.kind == Token::Number) {
            auto n = std::make_shared<ExprNode>();
            n->op = ExprOp::Literal;
            n->literal = cplx(cur_.number, 0.0);
            advance();
            return n;
        }
        if (cur_.kind == Token::Ident) {
            const std::string name = cur_.text;
            const int pos = cur_.pos;
            advance();
            if (cur_.kind == Token::LParen) {
                advance();
                ExprPtr arg = parse_sum();
                if (cur_.kind != Token::RParen)
                    lex_.throw_at(cur_.pos, "expected ')'");
                advance();
                if (name == "sin") return make(ExprOp::Sin, arg);
                if (name == "cos") return make(ExprOp::Cos, arg);
                if (name == "exp") return make(ExprOp::Exp, arg);
                if (name == "re") return make(ExprOp::Re, arg);
                if (name == "im") return make(ExprOp::Im, arg);
                if (name == "conj") return make(ExprOp::Conj, arg);
                lex_.throw_at(pos, "unknown function '" + name + "'");
            }
            if (name == "i") {
                auto n = std::make_shared<ExprNode>();
                n->op = ExprOp::Literal;
                n->literal = cplx(0.0, 1.0);
                return n;
            }
            if (name == "pi") {
                auto n = std::make_shared<ExprNode>();
                n->op = ExprOp::Literal;
                n->literal = cplx(M_PI, 0.0);
                return n;
            }
            auto n = std::make_shared<ExprNode>();
            n->op = ExprOp::Var;
            n->name = name;
            return n;
        }
        if (cur_.kind == Token::LParen) {
            advance();
            ExprPtr e = parse_sum();
            if (cur_.kind != Token::RParen)
                lex_.throw_at(cur_.pos, "expected ')'");
            advance();
            return e;
        }
        lex_.throw_at(cur_.pos, cur_.kind == Token::End ? "unexpected end of expression"
                                                        : "unexpected token '" + cur_.text + "'");
        return nullptr; // unreachable
    }
};

cplx eval_node(const ExprNode* n, const ExprEnv& env) {
    switch (n->op) {
        case ExprOp::Literal: return n->literal;
        case ExprOp::Var: {
            auto it = env.vars.find(n->name);
            if (it == env.vars.end())
                throw TypeMismatch("unbound variable '" + n->name + "'");
            return it->second;
        }
        case ExprOp::Add: return eval_node(n->a.get(), env) + eval_node(n->b.get(), env);
        case ExprOp::Sub: return eval_node(n->a.get(), env) - eval_node(n->b.get(), env);
        case ExprOp::Mul: return eval_node(n->a.get(), env) * eval_node(n->b.get(), env);
        case ExprOp::Div: return eval_node(n->a.get(), env) / eval_node(n->b.get(), env);
        case ExprOp::Neg: return -eval_node(n->a.get(), env);
        case ExprOp::Pow: {
            cplx b = eval_node(n->a.get(), env);
            int p = n->ipow;
            if (p == 0) return cplx(1.0, 0.0);
            bool inv = p < 0;
            p = std::abs(p);
            cplx r(1.0, 0.0), acc = b;
            while (p) {
                if (p & 1) r *= acc;
                acc *= acc;
                p >>= 1;
            }
            return inv ? cplx(1.0, 0.0) / r : r;
        }
        case ExprOp::Sin: return std::sin(eval_node(n->a.get(), env));
        case ExprOp::Cos: return std::cos(eval_node(n->a.get(), env));
        case ExprOp::Exp: return std::exp(eval_node(n->a.get(), env));
        case ExprOp::Re: return cplx(eval_node(n->a.get(), env).real(), 0.0);
        case ExprOp::Im: return cplx(eval_node(n->a.get(), env).imag(), 0.0);
        case ExprOp::Conj: return std::conj(eval_node(n->a.get(), env));
    }
    return cplx(0.0, 0.0);
}

void print_node(const ExprNode* n, std::ostringstream& os) {
    switch (n->op) {
        case ExprOp::Literal: {
            if (n->literal.imag() == 0.0) {
                os << n->literal.real();
            } else if (n->literal.real() == 0.0 && n->literal.imag() == 1.0) {
                os << "i";
            } else {
                os << "(" << n->literal.real() << "+" << n->literal.imag() << "*i)";
            }
            break;
        }
        case ExprOp::Var: os << n->name; break;
        case ExprOp::Add: os << "("; print_node(n->a.get(), os); os << "+"; print_node(n->b.get(), os); os << ")"; break;
        case ExprOp::Sub: os << "("; print_node(n->a.get(), os); os << "-"; print_node(n->b.get(), os); os << ")"; break;
        case ExprOp::Mul: os << "("; print_node(n->a.get(), os); os << "*"; print_node(n->b.get(), os); os << ")"; break;
        case ExprOp::Div: os << "("; print_node(n->a.get(), os); os << "/"; print_node(n->b.get(), os); os << ")"; break;
        case ExprOp::Neg: os << "(-"; print_node(n->a.get(), os); os << ")"; break;
        case ExprOp::Pow: print_node(n->a.get(), os); os << "^" << n->ipow; break;
        case ExprOp::Sin: os << "sin("; print_node(n->a.get(), os); os << ")"; break;
        case ExprOp::Cos: os << "cos("; print_node(n->a.get(), os); os << ")"; break;
        case ExprOp::Exp: os << "exp("; print_node(n->a.get(), os); os << ")"; break;
        case ExprOp::Re: os << "re("; print_node(n->a.get(), os); os << ")"; break;
        case ExprOp::Im: os << "im("; print_node(n->a.get(), os); os << ")"; break;
        case ExprOp::Conj: os << "conj("; print_node(n->a.get(), os); os << ")"; break;
    }
}

void collect_vars(const ExprNode* n, std::set<std::string>& out) {
    if (!n) return;
    if (n->op == ExprOp::Var) out.insert(n->name);
    collect_vars(n->a.get(), out);
    collect_vars(n->b.get(), out);
}

bool equal_nodes(const ExprNode* a, const ExprNode* b) {
    if (!a || !b) return a == b;
    if (a->op != b->op) return false;
    if (a->op == ExprOp::Literal) return a->literal == b->literal;
    if (a->op == ExprOp::Var) return a->name == b->name;
    if (a->op == ExprOp::Pow && a->ipow != b->ipow) return false;
    return equal_nodes(a->a.get(), b->a.get()) && equal_nodes(a->b.get(), b->b.get());
}

} // namespace

Expr parse_expr(const std::string& text) {
    if (text.find_first_not_of(" \t\r\n") == std::string::npos)
        throw SyntaxError("empty expression", 1, 1);
    Parser p(text);
    return Expr(p.parse(), text);
}

cplx Expr::eval(const ExprEnv& env) const {
    if (!root_) throw TypeMismatch("evaluating empty expression");
    return eval_node(root_.get(), env);
}

cplx Expr::eval_tx(double t, double x) const {
    ExprEnv env;
    env.vars["t"] = cplx(t, 0.0);
    env.vars["x"] = cplx(x, 0.0);
    return eval(env);
}

cplx Expr::derivative_fd(const ExprEnv& env, const std::string& var, double h) const {
    ExprEnv e1 = env, e2 = env;
    const cplx v = env.vars.count(var) ? env.vars.at(var) : cplx(0.0, 0.0);
    e1.vars[var] = v + cplx(h, 0.0);
    e2.vars[var] = v - cplx(h, 0.0);
    return (eval(e1) - eval(e2)) / cplx(2.0 * h, 0.0);
}

std::string Expr::to_string() const {
    if (!root_) return "";
    std::ostringstream os;
    os.precision(17);
    print_node(root_.get(), os);
    return os.str();
}

std::vector<std::string> Expr::variables() const {
    std::set<std::string> s;
    collect_vars(root_.get(), s);
    return std::vector<std::string>(s.begin(), s.end());
}

bool Expr::structurally_equal(const Expr& other) const {
    return equal_nodes(root_.get(), other.root_.get());
}

} // namespace cgo
