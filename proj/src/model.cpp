#include "cgo/model.hpp"

#include <cmath>

namespace cgo {

namespace {

cplx ipow(cplx b, int p) {
    cplx r(1.0, 0.0);
    for (int i = 0; i < p; ++i) r *= b;
    return r;
}

} // namespace

cplx PolyInU::eval(double t, double x, const VecC& u) const {
    cplx out(0.0, 0.0);
    for (const auto& m : terms) {
        cplx v = m.coeff(t, x);
        for (int k = 0; k < N; ++k) {
            if (m.a[k]) v *= ipow(u[k], m.a[k]);
            if (m.b[k]) v *= ipow(std::conj(u[k]), m.b[k]);
        }
        out += v;
    }
    return out;
}

PolyInU PolyInU::d_u(int k) const {
    PolyInU out{N, {}};
    for (const auto& m : terms) {
        if (m.a[k] == 0) continue;
        UMonomial d = m;
        const double w = double(m.a[k]);
        d.a[k] -= 1;
        CoeffFn base = m.coeff;
        d.coeff.f = [base, w](double t, double x) { return w * base(t, x); };
        d.coeff.dfdx = [base, w](double t, double x) { return w * base.dx(t, x); };
        out.terms.push_back(std::move(d));
    }
    return out;
}

PolyInU PolyInU::d_ubar(int k) const {
    PolyInU out{N, {}};
    for (const auto& m : terms) {
        if (m.b[k] == 0) continue;
        UMonomial d = m;
        const double w = double(m.b[k]);
        d.b[k] -= 1;
        CoeffFn base = m.coeff;
        d.coeff.f = [base, w](double t, double x) { return w * base(t, x); };
        d.coeff.dfdx = [base, w](double t, double x) { return w * base.dx(t, x); };
        out.terms.push_back(std::move(d));
    }
    return out;
}

bool PolyInU::depends_on_u() const {
    for (const auto& m : terms)
        if (m.degree() > 0) return true;
    return false;
}

int PolyInU::degree() const {
    int d = 0;
    for (const auto& m : terms) d = std::max(d, m.degree());
    return d;
}

MatC SystemModel::A_at(double t, double x, const VecC& u) const {
    MatC out(N, N);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) out(i, j) = A_entry(i, j).eval(t, x, u);
    return out;
}

VecC SystemModel::F_at(double t, double x, const VecC& u) const {
    VecC out(N);
    for (int i = 0; i < N; ++i) out[i] = F[i].eval(t, x, u);
    return out;
}

VecC SystemModel::u0_at(double t, double x) const {
    VecC out(N);
    for (int i = 0; i < N; ++i) out[i] = u0[i](t, x);
    return out;
}

VecC SystemModel::du0_dx(double t, double x) const {
    VecC out(N);
    for (int i = 0; i < N; ++i) out[i] = u0[i].dx(t, x);
    return out;
}

MatC SystemModel::dA_du(int k, double t, double x) const {
    const VecC bg = u0_at(t, x);
    MatC out(N, N);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) out(i, j) = A_entry(i, j).d_u(k).eval(t, x, bg);
    return out;
}

MatC SystemModel::dA_dubar(int k, double t, double x) const {
    const VecC bg = u0_at(t, x);
    MatC out(N, N);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) out(i, j) = A_entry(i, j).d_ubar(k).eval(t, x, bg);
    return out;
}

MatC SystemModel::dF_du(double t, double x) const {
    const VecC bg = u0_at(t, x);
    MatC out(N, N);
    for (int i = 0; i < N; ++i)
        for (int k = 0; k < N; ++k) out(i, k) = F[i].d_u(k).eval(t, x, bg);
    return out;
}

MatC SystemModel::dF_dubar(double t, double x) const {
    const VecC bg = u0_at(t, x);
    MatC out(N, N);
    for (int i = 0; i < N; ++i)
        for (int k = 0; k < N; ++k) out(i, k) = F[i].d_ubar(k).eval(t, x, bg);
    return out;
}

bool SystemModel::A_depends_on_u() const {
    for (const auto& p : A)
        if (p.depends_on_u()) return true;
    return false;
}

VecC SystemModel::L_residual(double t, double x, const VecC& u, const VecC& ut,
                             const VecC& ux) const {
    return ut + A_at(t, x, u) * ux + F_at(t, x, u);
}

// ---------------------------------------------------------------------------
// Registry
// ---------------------------------------------------------------------------

namespace {

UMonomial mono(int N, std::initializer_list<int> a, std::initializer_list<int> b, CoeffFn c) {
    UMonomial m;
    m.a.assign(a.begin(), a.end());
    m.b.assign(b.begin(), b.end());
    m.a.resize(N, 0);
    m.b.resize(N, 0);
    m.coeff = std::move(c);
    return m;
}

PolyInU poly(int N, std::vector<UMonomial> ms) {
    PolyInU p{N, std::move(ms)};
    return p;
}

CoeffFn fn(std::function<cplx(double, double)> f, std::function<cplx(double, double)> dfdx) {
    CoeffFn c;
    c.f = std::move(f);
    c.dfdx = std::move(dfdx);
    return c;
}

SystemModel base2(const std::string& name, Mode mode) {
    SystemModel m;
    m.name = name;
    m.N = 2;
    m.mode = mode;
    m.T = 0.5;
    m.xbar = 0.0;
    m.rho = 1.2;
    m.c = 1.0;
    m.K_radius = 0.5;
    const auto zero = PolyInU::zero(2);
    m.A.assign(4, zero);
    m.F.assign(2, zero);
    m.u0.assign(2, CoeffFn::constant(cplx(0.0, 0.0)));
    return m;
}

SystemModel make_S0() {
    SystemModel m = base2("S0", Mode::Semilinear);
    m.A[0] = PolyInU::constant(2, CoeffFn::constant(1.0));
    m.A[3] = PolyInU::constant(2, CoeffFn::constant(-1.0));
    m.lambda_exact = {[](double, double) { return -1.0; }, [](double, double) { return 1.0; }};
    return m;
}

SystemModel make_S1() {
    SystemModel m = base2("S1", Mode::Semilinear);
    m.A[0] = PolyInU::constant(2, CoeffFn::constant(1.0));
    m.A[3] = PolyInU::constant(2, CoeffFn::constant(-1.0));
    // F = (u1^2 conj(u1) + conj(u1) u2^2,  u2^2 conj(u2) + u1^2 conj(u2))
    m.F[0] = poly(2, {mono(2, {2, 0}, {1, 0}, CoeffFn::constant(1.0)),
                      mono(2, {0, 2}, {1, 0}, CoeffFn::constant(1.0))});
    m.F[1] = poly(2, {mono(2, {0, 2}, {0, 1}, CoeffFn::constant(1.0)),
                      mono(2, {2, 0}, {0, 1}, CoeffFn::constant(1.0))});
    m.lambda_exact = {[](double, double) { return -1.0; }, [](double, double) { return 1.0; }};
    return m;
}

SystemModel make_S2() {
    SystemModel m = base2("S2", Mode::Quasilinear);
    m.c = 1.1;
    const double delta = 0.5, cf = 0.3, kappa = 0.4;
    m.A[0] = PolyInU::constant(2, CoeffFn::constant(1.0));
    m.A[3] = PolyInU::constant(2, CoeffFn::constant(-1.0));
    m.A[1] = poly(2, {mono(2, {0, 0}, {1, 0}, CoeffFn::constant(delta))}); // A12 = d conj(u1)
    m.A[2] = poly(2, {mono(2, {1, 0}, {0, 0}, CoeffFn::constant(delta))}); // A21 = d u1
    // F = (cf u1 + k conj(u1) u2, cf u2 + k u1^2): second-harmonic ladder.
    m.F[0] = poly(2, {mono(2, {1, 0}, {0, 0}, CoeffFn::constant(cf)),
                      mono(2, {0, 1}, {1, 0}, CoeffFn::constant(kappa))});
    m.F[1] = poly(2, {mono(2, {0, 1}, {0, 0}, CoeffFn::constant(cf)),
                      mono(2, {2, 0}, {0, 0}, CoeffFn::constant(kappa))});
    m.lambda_exact = {[](double, double) { return -1.0; }, [](double, double) { return 1.0; }};
    return m;
}

SystemModel make_S3() {
    SystemModel m;
    m.name = "S3";
    m.N = 3;
    m.mode = Mode::Quasilinear;
    m.T = 0.5;
    m.xbar = 0.0;
    m.rho = 1.6;
    m.c = 1.6;
    m.K_radius = 0.5;
    const auto zero = PolyInU::zero(3);
    m.A.assign(9, zero);
    m.F.assign(3, zero);
    m.u0.assign(3, CoeffFn::constant(cplx(0.0, 0.0)));

    // Background: wave speed 1 + 0.3 sin x on a direction rotated by
    // theta(x) = 0.4 sin x inside the (1,2) block; speeds -1 and 0 elsewhere.
    const double la_b = -1.0, la_c = 0.0;
    auto lw = [](double x) { return 1.0 + 0.3 * std::sin(x); };
    auto dlw = [](double x) { return 0.3 * std::cos(x); };
    auto th = [](double x) { return 0.4 * std::sin(x); };
    auto dth = [](double x) { return 0.4 * std::cos(x); };

    auto a11 = fn(
        [=](double, double x) {
            const double c0 = std::cos(th(x)), s0 = std::sin(th(x));
            return cplx(c0 * c0 * lw(x) + s0 * s0 * la_b, 0.0);
        },
        [=](double, double x) {
            const double c0 = std::cos(th(x)), s0 = std::sin(th(x));
            return cplx(c0 * c0 * dlw(x) +
                            2.0 * c0 * s0 * dth(x) * (la_b - lw(x)),
                        0.0);
        });
    auto a22 = fn(
        [=](double, double x) {
            const double c0 = std::cos(th(x)), s0 = std::sin(th(x));
            return cplx(s0 * s0 * lw(x) + c0 * c0 * la_b, 0.0);
        },
        [=](double, double x) {
            const double c0 = std::cos(th(x)), s0 = std::sin(th(x));
            return cplx(s0 * s0 * dlw(x) -
                            2.0 * c0 * s0 * dth(x) * (la_b - lw(x)),
                        0.0);
        });
    auto a12 = fn(
        [=](double, double x) {
            const double c0 = std::cos(th(x)), s0 = std::sin(th(x));
            return cplx(c0 * s0 * (lw(x) - la_b), 0.0);
        },
        [=](double, double x) {
            const double c0 = std::cos(th(x)), s0 = std::sin(th(x));
            return cplx(c0 * s0 * dlw(x) +
                            (c0 * c0 - s0 * s0) * dth(x) * (lw(x) - la_b),
                        0.0);
        });

    m.A[0 * 3 + 0] = PolyInU::constant(3, a11);
    m.A[0 * 3 + 1] = PolyInU::constant(3, a12);
    m.A[1 * 3 + 0] = PolyInU::constant(3, a12);
    m.A[1 * 3 + 1] = PolyInU::constant(3, a22);
    m.A[2 * 3 + 2] = PolyInU::constant(3, CoeffFn::constant(la_c));

    // Second-harmonic coupling of the (1,2) wave block into component 3.
    const double delta = 0.4, cf = 0.3, kappa = 0.4;
    m.A[0 * 3 + 2] = poly(3, {mono(3, {0, 0, 0}, {1, 0, 0}, CoeffFn::constant(delta))});
    m.A[2 * 3 + 0] = poly(3, {mono(3, {1, 0, 0}, {0, 0, 0}, CoeffFn::constant(delta))});
    m.A[1 * 3 + 2] = poly(3, {mono(3, {0, 0, 0}, {0, 1, 0}, CoeffFn::constant(delta))});
    m.A[2 * 3 + 1] = poly(3, {mono(3, {0, 1, 0}, {0, 0, 0}, CoeffFn::constant(delta))});

    m.F[0] = poly(3, {mono(3, {1, 0, 0}, {0, 0, 0}, CoeffFn::constant(cf)),
                      mono(3, {0, 0, 1}, {1, 0, 0}, CoeffFn::constant(kappa))});
    m.F[1] = poly(3, {mono(3, {0, 1, 0}, {0, 0, 0}, CoeffFn::constant(cf)),
                      mono(3, {0, 0, 1}, {0, 1, 0}, CoeffFn::constant(kappa))});
    m.F[2] = poly(3, {mono(3, {0, 0, 1}, {0, 0, 0}, CoeffFn::constant(cf)),
                      mono(3, {2, 0, 0}, {0, 0, 0}, CoeffFn::constant(kappa)),
                      mono(3, {0, 2, 0}, {0, 0, 0}, CoeffFn::constant(kappa))});

    m.lambda_exact = {[](double, double) { return -1.0; },
                      [](double, double) { return 0.0; },
                      [=](double, double x) { return lw(x); }};
    return m;
}

} // namespace

bool registry_has(const std::string& key) {
    return key == "S0" || key == "S1" || key == "S2" || key == "S3";
}

SystemModel make_registry_model(const std::string& key) {
    if (key == "S0") return make_S0();
    if (key == "S1") return make_S1();
    if (key == "S2") return make_S2();
    if (key == "S3") return make_S3();
    throw ConfigError("unknown registry model '" + key + "'");
}

// ---------------------------------------------------------------------------
// DSL expansion into polynomials in (u, conj u)
// ---------------------------------------------------------------------------

namespace {

struct SymMonomial {
    std::vector<int> a, b;
    std::vector<Expr> factors; // (t,x)-only factors, multiplied together
    cplx scale{1.0, 0.0};
};

using SymPoly = std::vector<SymMonomial>;

bool is_u_var(const std::string& name, int N, int& k) {
    if (name.size() < 2 || name[0] != 'u') return false;
    for (size_t i = 1; i < name.size(); ++i)
        if (!std::isdigit(unsigned(name[i]))) return false;
    k = std::stoi(name.substr(1)) - 1;
    if (k < 0 || k >= N) throw TypeMismatch("component index out of range in '" + name + "'");
    return true;
}

bool expr_contains_u(const ExprNode* n, int N) {
    if (!n) return false;
    if (n->op == ExprOp::Var) {
        int k;
        return is_u_var(n->name, N, k);
    }
    return expr_contains_u(n->a.get(), N) || expr_contains_u(n->b.get(), N);
}

SymPoly expand(const ExprNode* n, int N, bool conjugated);

SymPoly expand_product(const SymPoly& p, const SymPoly& q, int N) {
    SymPoly out;
    for (const auto& m1 : p)
        for (const auto& m2 : q) {
            SymMonomial m;
            m.a = m1.a;
            m.b = m1.b;
            for (int k = 0; k < N; ++k) {
                m.a[k] += m2.a[k];
                m.b[k] += m2.b[k];
            }
            m.factors = m1.factors;
            m.factors.insert(m.factors.end(), m2.factors.begin(), m2.factors.end());
            m.scale = m1.scale * m2.scale;
            out.push_back(std::move(m));
        }
    return out;
}

SymPoly expand(const ExprNode* n, int N, bool conjugated) {
    switch (n->op) {
        case ExprOp::Literal: {
            SymMonomial m;
            m.a.assign(N, 0);
            m.b.assign(N, 0);
            cplx v = conjugated ? std::conj(n->literal) : n->literal;
            auto node = std::make_shared<ExprNode>();
            node->op = ExprOp::Literal;
            node->literal = v;
            m.factors.push_back(Expr(node, ""));
            return {m};
        }
        case ExprOp::Var: {
            int k;
            if (is_u_var(n->name, N, k)) {
                SymMonomial m;
                m.a.assign(N, 0);
                m.b.assign(N, 0);
                (conjugated ? m.b : m.a)[k] = 1;
                return {m};
            }
            SymMonomial m;
            m.a.assign(N, 0);
            m.b.assign(N, 0);
            // t, x are real; conjugation is a no-op on them
            m.factors.push_back(Expr(std::make_shared<ExprNode>(*n), n->name));
            return {m};
        }
        case ExprOp::Add: {
            SymPoly p = expand(n->a.get(), N, conjugated);
            SymPoly q = expand(n->b.get(), N, conjugated);
            p.insert(p.end(), q.begin(), q.end());
            return p;
        }
        case ExprOp::Sub: {
            SymPoly p = expand(n->a.get(), N, conjugated);
            SymPoly q = expand(n->b.get(), N, conjugated);
            for (auto& m : q) m.scale = -m.scale;
            p.insert(p.end(), q.begin(), q.end());
            return p;
        }
        case ExprOp::Neg: {
            SymPoly p = expand(n->a.get(), N, conjugated);
            for (auto& m : p) m.scale = -m.scale;
            return p;
        }
        case ExprOp::Mul:
            return expand_product(expand(n->a.get(), N, conjugated),
                                  expand(n->b.get(), N, conjugated), N);
        case ExprOp::Div: {
            if (expr_contains_u(n->b.get(), N))
                throw TypeMismatch("division by a u-dependent expression is not polynomial");
            SymPoly p = expand(n->a.get(), N, conjugated);
            auto inv = std::make_shared<ExprNode>();
            inv->op = ExprOp::Div;
            auto one = std::make_shared<ExprNode>();
            one->op = ExprOp::Literal;
            one->literal = cplx(1.0, 0.0);
            inv->a = one;
            inv->b = std::make_shared<ExprNode>(*n->b);
            for (auto& m : p) m.factors.push_back(Expr(inv, ""));
            return p;
        }
        case ExprOp::Pow: {
            if (n->ipow < 0) {
                if (expr_contains_u(n->a.get(), N))
                    throw TypeMismatch("negative power of a u-dependent expression");
            }
            if (!expr_contains_u(n->a.get(), N)) {
                SymMonomial m;
                m.a.assign(N, 0);
                m.b.assign(N, 0);
                m.factors.push_back(Expr(std::make_shared<ExprNode>(*n), ""));
                return {m};
            }
            SymPoly base = expand(n->a.get(), N, conjugated);
            SymPoly acc;
            {
                SymMonomial unit;
                unit.a.assign(N, 0);
                unit.b.assign(N, 0);
                acc.push_back(unit);
            }
            for (int i = 0; i < n->ipow; ++i) acc = expand_product(acc, base, N);
            return acc;
        }
        case ExprOp::Conj:
            return expand(n->a.get(), N, !conjugated);
        case ExprOp::Re:
        case ExprOp::Im: {
            if (expr_contains_u(n->a.get(), N)) {
                // re w = (w + conj w)/2, im w = (w - conj w)/(2i); both are
                // real-valued, so the outer conjugation flag drops out
                SymPoly p = expand(n->a.get(), N, false);
                SymPoly q = expand(n->a.get(), N, true);
                const cplx wp = n->op == ExprOp::Re ? cplx(0.5, 0) : cplx(0, -0.5);
                const cplx wq = n->op == ExprOp::Re ? cplx(0.5, 0) : cplx(0, 0.5);
                for (auto& m : p) m.scale *= wp;
                for (auto& m : q) m.scale *= wq;
                p.insert(p.end(), q.begin(), q.end());
                return p;
            }
            SymMonomial m;
            m.a.assign(N, 0);
            m.b.assign(N, 0);
            m.factors.push_back(Expr(std::make_shared<ExprNode>(*n), ""));
            return {m};
        }
        case ExprOp::Sin:
        case ExprOp::Cos:
        case ExprOp::Exp: {
            if (expr_contains_u(n->a.get(), N))
                throw TypeMismatch("transcendental function of u is not polynomial in (u, conj u)");
            SymMonomial m;
            m.a.assign(N, 0);
            m.b.assign(N, 0);
            m.factors.push_back(Expr(std::make_shared<ExprNode>(*n), ""));
            return {m};
        }
    }
    throw TypeMismatch("unsupported expression node");
}

} // namespace

PolyInU poly_from_expr(const Expr& e, int N, double coeff_fd_step) {
    SymPoly sp = expand(e.root().get(), N, false);
    PolyInU p{N, {}};
    for (auto& m : sp) {
        UMonomial um;
        um.a = m.a;
        um.b = m.b;
        const cplx scale = m.scale;
        auto factors = std::make_shared<std::vector<Expr>>(std::move(m.factors));
        um.coeff.f = [factors, scale](double t, double x) {
            cplx v = scale;
            for (const auto& f : *factors) v *= f.eval_tx(t, x);
            return v;
        };
        um.coeff.fd_step = coeff_fd_step;
        p.terms.push_back(std::move(um));
    }
    return p;
}

SystemModel make_system(const ModelConfig& cfg) {
    SystemModel m;
    if (!cfg.registry.empty()) {
        m = make_registry_model(cfg.registry);
        if (cfg.T) m.T = *cfg.T;
        if (cfg.xbar) m.xbar = *cfg.xbar;
        if (cfg.rho) m.rho = *cfg.rho;
        if (cfg.c) m.c = *cfg.c;
        if (cfg.K_radius) m.K_radius = *cfg.K_radius;
        return m;
    }
    {
        m.name = "custom";
        m.N = cfg.N;
        m.mode = cfg.mode == "quasilinear" ? Mode::Quasilinear : Mode::Semilinear;
        const auto zero = PolyInU::zero(m.N);
        m.A.assign(m.N * m.N, zero);
        m.F.assign(m.N, zero);
        m.u0.assign(m.N, CoeffFn::constant(cplx(0.0, 0.0)));
        const double fd = 1e-5 * cfg.rho.value_or(1.2);
        for (const auto& [key, e] : cfg.system_entries) {
            if (key[0] == 'a') {
                const int i = key[1] - '1', j = key[2] - '1';
                if (i < 0 || i >= m.N || j < 0 || j >= m.N)
                    throw TypeMismatch("[system] " + key + ": index out of range");
                m.A[i * m.N + j] = poly_from_expr(e, m.N, fd);
            } else if (key[0] == 'f') {
                const int i = key[1] - '1';
                if (i < 0 || i >= m.N) throw TypeMismatch("[system] " + key + ": index out of range");
                m.F[i] = poly_from_expr(e, m.N, fd);
            } else { // u0k
                const int i = key[2] - '1';
                if (i < 0 || i >= m.N) throw TypeMismatch("[system] " + key + ": index out of range");
                PolyInU p = poly_from_expr(e, m.N, fd);
                for (const auto& term : p.terms)
                    if (term.degree() > 0)
                        throw TypeMismatch("[system] " + key + ": background must not depend on u");
                Expr ec = e;
                CoeffFn c;
                c.f = [ec](double t, double x) { return ec.eval_tx(t, x); };
                c.fd_step = fd;
                m.u0[i] = c;
            }
        }
    }
    m.T = cfg.T.value_or(0.5);
    m.xbar = cfg.xbar.value_or(0.0);
    m.rho = cfg.rho.value_or(1.2);
    m.c = cfg.c.value_or(1.0);
    m.K_radius = cfg.K_radius.value_or(0.5);
    return m;
}

} // namespace cgo
