#include "cgo/system.hpp"

#include <cmath>

#include "cgo/errors.hpp"

namespace cgo {

namespace {

// Deterministic eigenvector phase: the component of largest modulus is made
// real positive (ties resolved toward the lowest index).
void fix_phase(VecC& v) {
    int kmax = 0;
    double best = -1.0;
    for (int k = 0; k < v.size(); ++k) {
        const double m = std::abs(v[k]);
        if (m > best + 1e-14) {
            best = m;
            kmax = k;
        }
    }
    const cplx pivot = v[kmax];
    if (std::abs(pivot) > 0) v *= std::conj(pivot) / std::abs(pivot);
}

} // namespace

EigenData eig_decompose_point(const SystemModel& model, double t, double x,
                              const EigenOptions& opt) {
    EigenData out;
    out.A0 = model.A0(t, x);
    const MatC H = 0.5 * (out.A0 + out.A0.adjoint());
    Eigen::SelfAdjointEigenSolver<MatC> es(H);
    if (es.info() != Eigen::Success)
        throw ValidationError("eigendecomposition failed at t=" + std::to_string(t) +
                              ", x=" + std::to_string(x));
    out.lambda = es.eigenvalues();
    for (int l = 0; l + 1 < model.N; ++l) {
        if (out.lambda[l + 1] - out.lambda[l] < opt.delta_min)
            throw EigenvalueCollision("eigenvalue gap " +
                                      std::to_string(out.lambda[l + 1] - out.lambda[l]) +
                                      " below delta_min at t=" + std::to_string(t) +
                                      ", x=" + std::to_string(x));
    }
    out.proj.resize(model.N);
    for (int l = 0; l < model.N; ++l) {
        VecC v = es.eigenvectors().col(l);
        fix_phase(v);
        out.proj[l] = v * v.adjoint();
    }
    return out;
}

BranchDerivs branch_derivs(const SystemModel& model, int branch, double t, double x,
                           const EigenOptions& opt) {
    const double h = opt.fd_step;
    auto lam = [&](double xx) {
        return eig_decompose_point(model, t, xx, opt).lambda[branch];
    };
    BranchDerivs d;
    const double lm = lam(x - h), l0 = lam(x), lp = lam(x + h);
    d.lambda = l0;
    d.alpha = (lp - lm) / (2.0 * h);
    d.beta = (lp - 2.0 * l0 + lm) / (h * h);
    return d;
}

EigenField eig_decompose_grid(const SystemModel& model, const Grid& grid,
                              const EigenOptions& opt) {
    EigenField f;
    f.grid = grid;
    f.N = model.N;
    const int n = grid.nt * grid.nx;
    f.lambda.resize(n);
    f.proj.resize(n);
    f.alpha.resize(n);
    f.beta.resize(n);
    for (int i = 0; i < grid.nt; ++i) {
        for (int j = 0; j < grid.nx; ++j) {
            const double t = grid.t(i), x = grid.x(j);
            EigenData d = eig_decompose_point(model, t, x, opt);
            const int id = i * grid.nx + j;
            f.lambda[id] = d.lambda;
            f.proj[id] = std::move(d.proj);
            VecD a(model.N), b(model.N);
            for (int l = 0; l < model.N; ++l) {
                BranchDerivs bd = branch_derivs(model, l, t, x, opt);
                a[l] = bd.alpha;
                b[l] = bd.beta;
            }
            f.alpha[id] = a;
            f.beta[id] = b;
        }
    }
    return f;
}

ValidationReport validate_system(const SystemModel& model, const SamplePlan& plan) {
    ValidationReport rep;
    rep.min_eigen_gap = std::numeric_limits<double>::infinity();

    // net in K: background, zero, and axis/diagonal points on the K-sphere
    std::vector<VecC> unet;
    unet.push_back(VecC::Zero(model.N));
    for (int k = 0; k < model.N; ++k) {
        for (cplx dir : {cplx(1, 0), cplx(-1, 0), cplx(0, 1), cplx(0.7071, 0.7071)}) {
            VecC u = VecC::Zero(model.N);
            u[k] = model.K_radius * dir;
            unet.push_back(u);
        }
    }
    {
        VecC u = VecC::Constant(model.N, cplx(model.K_radius / std::sqrt(2.0 * model.N),
                                              model.K_radius / std::sqrt(2.0 * model.N)));
        unet.push_back(u);
    }

    for (int i = 0; i < plan.nt; ++i) {
        const double t = model.T * double(i) / (plan.nt - 1);
        const double half = model.rho - model.c * t;
        for (int j = 0; j < plan.nx; ++j) {
            const double x = model.xbar - half + 2.0 * half * double(j) / (plan.nx - 1);
            const VecC bg = model.u0_at(t, x);
            for (const auto& du : unet) {
                const VecC u = bg + du;
                const MatC A = model.A_at(t, x, u);
                const double herm = (A - A.adjoint()).cwiseAbs().maxCoeff();
                rep.max_hermitian_deviation = std::max(rep.max_hermitian_deviation, herm);
                if (herm > plan.herm_tol)
                    throw NonHermitian("A deviates from Hermitian by " + std::to_string(herm) +
                                       " at t=" + std::to_string(t) + ", x=" + std::to_string(x));
                Eigen::SelfAdjointEigenSolver<MatC> es(0.5 * (A + A.adjoint()));
                for (int l = 0; l + 1 < model.N; ++l)
                    rep.min_eigen_gap =
                        std::min(rep.min_eigen_gap, es.eigenvalues()[l + 1] - es.eigenvalues()[l]);
                rep.sup_speed = std::max(
                    {rep.sup_speed, std::abs(es.eigenvalues()[0]),
                     std::abs(es.eigenvalues()[model.N - 1])});
            }

            if (model.mode == Mode::Quasilinear) {
                // background must solve the full system; u0 is time-independent
                // in the shipped models, so d/dt is taken by FD for generality
                const double ht = 1e-6 * std::max(model.T, 1e-6);
                const double hx = 1e-6 * model.rho;
                VecC ut(model.N), ux(model.N);
                const double tp = std::min(t + ht, model.T), tm = std::max(t - ht, 0.0);
                ut = (model.u0_at(tp, x) - model.u0_at(tm, x)) / (tp - tm);
                ux = (model.u0_at(t, x + hx) - model.u0_at(t, x - hx)) / (2.0 * hx);
                const VecC res = model.L_residual(t, x, bg, ut, ux);
                rep.background_residual = std::max(rep.background_residual, res.cwiseAbs().maxCoeff());
            } else {
                if (model.A_depends_on_u())
                    throw ValidationError("semilinear mode requires A independent of u");
                const VecC F0 = model.F_at(t, x, VecC::Zero(model.N));
                rep.F_at_zero_norm = std::max(rep.F_at_zero_norm, F0.cwiseAbs().maxCoeff());
            }
        }
    }

    if (rep.min_eigen_gap < plan.delta_min)
        throw EigenvalueCollision("minimal eigenvalue gap " + std::to_string(rep.min_eigen_gap) +
                                  " below delta_min");
    if (model.mode == Mode::Quasilinear && rep.background_residual > plan.background_tol)
        throw BackgroundNotSolution("background residual " +
                                    std::to_string(rep.background_residual));
    if (model.mode == Mode::Semilinear && rep.F_at_zero_norm > plan.semilinear_tol)
        throw ValidationError("F(t,x,0) does not vanish: " + std::to_string(rep.F_at_zero_norm));

    rep.domain_ok = model.rho > model.c * model.T && model.c >= rep.sup_speed - 1e-12;
    rep.passed = rep.domain_ok;
    return rep;
}

MatC symbol(const SystemModel& model, double t, double x, cplx tau, cplx xi) {
    if (std::abs(tau) == 0.0 && std::abs(xi) == 0.0)
        throw std::invalid_argument("symbol: (tau, xi) must be nonzero");
    if (!(t >= -1e-12 && t <= model.T + 1e-12 &&
          std::abs(x - model.xbar) <= model.rho - model.c * t + 1e-12))
        throw OutsideDomain("symbol: (t,x) outside the domain of determinacy");
    const MatC A0 = model.A0(t, x);
    MatC out = MatC::Identity(model.N, model.N) * tau + A0 * xi;
    return cplx(0.0, 1.0) * out;
}

} // namespace cgo
