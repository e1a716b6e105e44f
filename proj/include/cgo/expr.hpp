// expr.hpp — tiny arithmetic expression language used by config files for
// coefficient functions of (t, x) and polynomials in (u, conj u).
//
// Grammar (standard precedence, ^ binds tightest and takes integer powers):
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := ('-'|'+') factor | power
//   power  := atom ('^' integer)?
//   atom   := number | ident | ident '(' expr ')' | '(' expr ')'
// Identifiers: t, x, i, pi, u1..uN; functions: sin cos exp re im conj.

#pragma once

#include <complex>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "cgo/errors.hpp"

namespace cgo {

using cplx = std::complex<double>;

struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

enum class ExprOp {
    Literal, Var, Add, Sub, Mul, Div, Neg, Pow,
    Sin, Cos, Exp, Re, Im, Conj
};

struct ExprNode {
    ExprOp op = ExprOp::Literal;
    cplx literal{0.0, 0.0};
    std::string name;          // Var
    int ipow = 1;              // Pow
    ExprPtr a, b;
};

// Variable bindings for evaluation.
struct ExprEnv {
    std::map<std::string, cplx> vars;
};

class Expr {
public:
    Expr() = default;
    explicit Expr(ExprPtr root, std::string text) : root_(std::move(root)), text_(std::move(text)) {}

    bool empty() const { return !root_; }
    const std::string& text() const { return text_; }
    ExprPtr root() const { return root_; }

    cplx eval(const ExprEnv& env) const;

    // Convenience for coefficient functions of (t, x).
    cplx eval_tx(double t, double x) const;

    // Centered-difference derivative in one named variable.
    cplx derivative_fd(const ExprEnv& env, const std::string& var, double h) const;

    // Pretty-print; reparsing the output yields a structurally equal AST.
    std::string to_string() const;

    // Set of variable names appearing in the expression.
    std::vector<std::string> variables() const;

    bool structurally_equal(const Expr& other) const;

private:
    ExprPtr root_;
    std::string text_;
};

// Throws SyntaxError with 1-based position on malformed input.
Expr parse_expr(const std::string& text);

} // namespace cgo
