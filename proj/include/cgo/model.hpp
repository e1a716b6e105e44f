// model.hpp — the hyperbolic system: A(t,x,u), F(t,x,u) as finite polynomial
// expansions in (u, conj u) with matrix/vector coefficient functions of (t,x).
// Differentials in u are exact, term by term.

#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "cgo/config.hpp"
#include "cgo/expr.hpp"
#include "cgo/numerics.hpp"

namespace cgo {

using MatC = Eigen::MatrixXcd;
using VecC = Eigen::VectorXcd;
using VecD = Eigen::VectorXd;

enum class Mode { Semilinear, Quasilinear };

// Scalar coefficient function of (t,x) with an x-derivative.
struct CoeffFn {
    std::function<cplx(double, double)> f;
    std::function<cplx(double, double)> dfdx; // nullable -> centered FD with fd_step
    double fd_step = 1e-5;

    cplx operator()(double t, double x) const { return f(t, x); }
    cplx dx(double t, double x) const {
        if (dfdx) return dfdx(t, x);
        return (f(t, x + fd_step) - f(t, x - fd_step)) / (2.0 * fd_step);
    }
    static CoeffFn constant(cplx v) {
        CoeffFn c;
        c.f = [v](double, double) { return v; };
        c.dfdx = [](double, double) { return cplx(0.0, 0.0); };
        return c;
    }
};

// One monomial c(t,x) * prod_k u_k^{a_k} conj(u_k)^{b_k}.
struct UMonomial {
    std::vector<int> a, b;
    CoeffFn coeff;
    int degree() const {
        int d = 0;
        for (int v : a) d += v;
        for (int v : b) d += v;
        return d;
    }
};

struct PolyInU {
    int N = 0;
    std::vector<UMonomial> terms;

    cplx eval(double t, double x, const VecC& u) const;
    PolyInU d_u(int k) const;     // exact ∂/∂u_k
    PolyInU d_ubar(int k) const;  // exact ∂/∂conj(u_k)
    bool depends_on_u() const;
    int degree() const;
    static PolyInU zero(int N) { return PolyInU{N, {}}; }
    static PolyInU constant(int N, CoeffFn c) {
        PolyInU p{N, {}};
        p.terms.push_back({std::vector<int>(N, 0), std::vector<int>(N, 0), std::move(c)});
        return p;
    }
};

struct SystemModel {
    std::string name;
    int N = 0;
    Mode mode = Mode::Semilinear;
    std::vector<PolyInU> A;   // row-major N*N
    std::vector<PolyInU> F;   // N entries
    std::vector<CoeffFn> u0;  // background solution (identically zero in semilinear mode)
    double T = 0.5;
    double xbar = 0.0;
    double rho = 1.2;
    double c = 1.0;
    double K_radius = 0.5;

    // Closed-form eigenvalues when the registry knows them (oracle cross-checks).
    std::vector<std::function<double(double, double)>> lambda_exact;

    const PolyInU& A_entry(int i, int j) const { return A[i * N + j]; }

    MatC A_at(double t, double x, const VecC& u) const;
    VecC F_at(double t, double x, const VecC& u) const;
    VecC u0_at(double t, double x) const;
    VecC du0_dx(double t, double x) const;
    MatC A0(double t, double x) const { return A_at(t, x, u0_at(t, x)); }

    // Differentials at the background: third-order tensors flattened per k.
    // dA_du(k)(i,j)  = ∂A_ij/∂u_k (t,x,u0),  dA_dubar(k) = ∂A_ij/∂conj(u_k).
    MatC dA_du(int k, double t, double x) const;
    MatC dA_dubar(int k, double t, double x) const;
    // Jacobians of F at the background.
    MatC dF_du(double t, double x) const;
    MatC dF_dubar(double t, double x) const;

    bool A_depends_on_u() const;

    // L(t,x,u,∂u) with caller-supplied derivatives (pointwise residual).
    VecC L_residual(double t, double x, const VecC& u, const VecC& ut, const VecC& ux) const;
};

// Registry keys: S0 (linear constant-coefficient), S1 (semilinear cubic),
// S2 (quasilinear, diagonal background), S3 (quasilinear variable-coefficient,
// wave speeds 1 + 0.3 sin x / -1 / 0).
bool registry_has(const std::string& key);
SystemModel make_registry_model(const std::string& key);

// Build from a parsed config (registry key or DSL entries). Geometry fields
// (T, xbar, rho, c, K_radius) always come from the config when present.
SystemModel make_system(const ModelConfig& cfg);

// Expand a DSL expression into a polynomial in (u, conj u); throws TypeMismatch
// when the expression is not such a polynomial.
PolyInU poly_from_expr(const Expr& e, int N, double coeff_fd_step);

} // namespace cgo
