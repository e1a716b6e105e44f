#include "cgo/rayfield.hpp"

#include <cmath>

#include "cgo/errors.hpp"

namespace cgo {

namespace {

double bump_factor(const Bump& b, double s, int wa, int wb, int wc) {
    double v = 1.0;
    if (wa) {
        const double w = b.value(s);
        for (int i = 0; i < wa; ++i) v *= w;
        if (v == 0.0) return 0.0;
    }
    if (wb) {
        const double w = b.d1(s);
        for (int i = 0; i < wb; ++i) v *= w;
    }
    if (wc) {
        const double w = b.d2(s);
        for (int i = 0; i < wc; ++i) v *= w;
    }
    return v;
}

} // namespace

MatC ChartProfile::eval(const SpecIndex& idx, double t, double x) const {
    auto it = comp.find(idx);
    if (it == comp.end()) return MatC();
    const double s = x - path.eval(t);
    const Bump b = bump();
    MatC acc = MatC::Zero(it->second.rows, it->second.cols);
    for (const auto& term : it->second.terms) {
        const double bf = bump_factor(b, s, term.wa, term.wb, term.wc);
        if (bf == 0.0) continue;
        double sp = 1.0;
        MatC p = MatC::Zero(it->second.rows, it->second.cols);
        for (size_t j = 0; j < term.poly.size(); ++j) {
            p += sampled_eval(term.poly[j], t0, t1, t) * sp;
            sp *= s;
        }
        acc += p * bf;
    }
    return acc;
}

MatC ChartProfile::eval_dx(const SpecIndex& idx, double t, double x) const {
    auto it = comp.find(idx);
    if (it == comp.end()) return MatC();
    const double s = x - path.eval(t);
    const Bump b = bump();
    MatC acc = MatC::Zero(it->second.rows, it->second.cols);
    for (const auto& term : it->second.terms) {
        // product rule: d/ds of the polynomial, then of the bump factors
        double sp = 1.0;
        MatC dp = MatC::Zero(it->second.rows, it->second.cols);
        MatC p = MatC::Zero(it->second.rows, it->second.cols);
        for (size_t j = 0; j < term.poly.size(); ++j) {
            const MatC cj = sampled_eval(term.poly[j], t0, t1, t);
            p += cj * sp;
            if (j + 1 < term.poly.size())
                dp += sampled_eval(term.poly[j + 1], t0, t1, t) * (double(j + 1) * sp);
            sp *= s;
        }
        const double bf = bump_factor(b, s, term.wa, term.wb, term.wc);
        acc += dp * bf;
        // derivative of w^a w'^b w''^c (third derivative of w never needed:
        // fields are differentiated at most twice overall)
        if (term.wa)
            acc += p * (double(term.wa) *
                        bump_factor(b, s, term.wa - 1, term.wb + 1, term.wc));
        if (term.wb)
            acc += p * (double(term.wb) *
                        bump_factor(b, s, term.wa, term.wb - 1, term.wc + 1));
        if (term.wc)
            throw AlgebraError("chart field differentiated too many times (w''' needed)");
    }
    return acc;
}

MatC ChartProfile::eval_dt(const SpecIndex& idx, double t, double x) const {
    auto it = comp.find(idx);
    if (it == comp.end()) return MatC();
    const double s = x - path.eval(t);
    const double speed = path.eval_dt(t);
    const Bump b = bump();
    MatC acc = MatC::Zero(it->second.rows, it->second.cols);
    for (const auto& term : it->second.terms) {
        const double bf = bump_factor(b, s, term.wa, term.wb, term.wc);
        if (bf != 0.0) {
            double sp = 1.0;
            MatC pd = MatC::Zero(it->second.rows, it->second.cols);
            for (size_t j = 0; j < term.poly.size(); ++j) {
                pd += sampled_eval_dt(term.poly[j], t0, t1, t) * sp;
                sp *= s;
            }
            acc += pd * bf;
        }
    }
    // chain rule for the moving chart: d/dt|_x = d/dt|_s - speed * d/ds
    acc -= speed * eval_dx(idx, t, x);
    return acc;
}

ChartField cf_zero(int rows, int cols) { return ChartField{rows, cols, {}}; }

ChartField cf_add(const ChartField& a, const ChartField& b) {
    if (a.terms.empty()) return b;
    if (b.terms.empty()) return a;
    if (a.rows != b.rows || a.cols != b.cols) throw ShapeMismatch("chart field shapes differ");
    ChartField out = a;
    out.terms.insert(out.terms.end(), b.terms.begin(), b.terms.end());
    return out;
}

ChartField cf_scale(const ChartField& a, cplx s) {
    ChartField out = a;
    for (auto& t : out.terms)
        for (auto& pj : t.poly)
            for (auto& M : pj) M *= s;
    return out;
}

ChartField cf_conj(const ChartField& a) {
    ChartField out = a;
    for (auto& t : out.terms)
        for (auto& pj : t.poly)
            for (auto& M : pj) M = M.conjugate().eval();
    return out;
}

ChartField cf_product(const ChartField& a, const ChartField& b, int n_nodes) {
    const bool a_scalar = (a.rows == 1 && a.cols == 1);
    const bool b_scalar = (b.rows == 1 && b.cols == 1);
    if (!a_scalar && !b_scalar && a.cols != b.rows)
        throw ShapeMismatch("chart product shapes not composable");
    ChartField out;
    out.rows = a_scalar ? b.rows : a.rows;
    out.cols = b_scalar ? a.cols : b.cols;
    for (const auto& ta : a.terms) {
        for (const auto& tb : b.terms) {
            ChartTerm t;
            t.wa = ta.wa + tb.wa;
            t.wb = ta.wb + tb.wb;
            t.wc = ta.wc + tb.wc;
            const int da = int(ta.poly.size()), db = int(tb.poly.size());
            t.poly.assign(da + db - 1, std::vector<MatC>(n_nodes, MatC::Zero(out.rows, out.cols)));
            for (int i = 0; i < da; ++i)
                for (int j = 0; j < db; ++j)
                    for (int k = 0; k < n_nodes; ++k) {
                        if (a_scalar)
                            t.poly[i + j][k] += ta.poly[i][k](0, 0) * tb.poly[j][k];
                        else if (b_scalar)
                            t.poly[i + j][k] += ta.poly[i][k] * tb.poly[j][k](0, 0);
                        else
                            t.poly[i + j][k] += ta.poly[i][k] * tb.poly[j][k];
                    }
            out.terms.push_back(std::move(t));
        }
    }
    return out;
}

ChartField cf_apply_poly(const MatPoly& M, const ChartField& a, int n_nodes) {
    ChartField lhs;
    lhs.terms.push_back(ChartTerm{M.c, 0, 0, 0});
    lhs.rows = int(M.c[0][0].rows());
    lhs.cols = int(M.c[0][0].cols());
    return cf_product(lhs, a, n_nodes);
}

ChartField cf_mul_bump(const ChartField& a, int k) {
    ChartField out = a;
    for (auto& t : out.terms) t.wa += k;
    return out;
}

ChartField cf_ds(const ChartField& a) {
    ChartField out;
    out.rows = a.rows;
    out.cols = a.cols;
    for (const auto& t : a.terms) {
        if (t.poly.size() > 1) {
            ChartTerm d;
            d.wa = t.wa;
            d.wb = t.wb;
            d.wc = t.wc;
            d.poly.resize(t.poly.size() - 1);
            for (size_t j = 1; j < t.poly.size(); ++j) {
                d.poly[j - 1] = t.poly[j];
                for (auto& M : d.poly[j - 1]) M *= double(j);
            }
            out.terms.push_back(std::move(d));
        }
        if (t.wa) {
            ChartTerm d = t;
            d.wa -= 1;
            d.wb += 1;
            for (auto& pj : d.poly)
                for (auto& M : pj) M *= double(t.wa);
            out.terms.push_back(std::move(d));
        }
        if (t.wb) {
            ChartTerm d = t;
            d.wb -= 1;
            d.wc += 1;
            for (auto& pj : d.poly)
                for (auto& M : pj) M *= double(t.wb);
            out.terms.push_back(std::move(d));
        }
        if (t.wc)
            throw AlgebraError("chart field differentiated too many times (w''' needed)");
    }
    return out;
}

ChartField cf_dt_at_fixed_s(const ChartField& a, double t0, double t1) {
    ChartField out;
    out.rows = a.rows;
    out.cols = a.cols;
    for (const auto& t : a.terms) {
        ChartTerm d = t;
        const int n = int(t.poly.empty() ? 0 : t.poly[0].size());
        for (auto& pj : d.poly) {
            std::vector<MatC> dp(n);
            for (int k = 0; k < n; ++k)
                dp[k] = sampled_eval_dt(pj, t0, t1, t0 + (t1 - t0) * double(k) / (n - 1));
            pj = std::move(dp);
        }
        out.terms.push_back(std::move(d));
    }
    return out;
}

ChartField cf_scale_series(const ChartField& a, const std::vector<cplx>& s) {
    ChartField out = a;
    for (auto& t : out.terms)
        for (auto& pj : t.poly)
            for (size_t k = 0; k < pj.size(); ++k) pj[k] *= s[k];
    return out;
}

ChartProfile chart_like(const ChartProfile& proto) {
    ChartProfile out;
    out.mu = proto.mu;
    out.ell = proto.ell;
    out.s0 = proto.s0;
    out.t0 = proto.t0;
    out.t1 = proto.t1;
    out.n_nodes = proto.n_nodes;
    out.path = proto.path;
    return out;
}

ChartProfile cp_add(const ChartProfile& a, const ChartProfile& b) {
    ChartProfile out = a;
    for (const auto& [idx, f] : b.comp) {
        auto it = out.comp.find(idx);
        if (it == out.comp.end())
            out.comp.emplace(idx, f);
        else
            it->second = cf_add(it->second, f);
    }
    return out;
}

ChartProfile cp_scale(const ChartProfile& a, cplx s) {
    ChartProfile out = a;
    for (auto& [idx, f] : out.comp) f = cf_scale(f, s);
    return out;
}

ChartProfile cp_conj(const ChartProfile& a) {
    ChartProfile out = chart_like(a);
    for (const auto& [idx, f] : a.comp) out.comp.emplace(idx.conjugated(), cf_conj(f));
    return out;
}

ChartProfile cp_index_scale(const ChartProfile& a,
                            const std::function<cplx(const SpecIndex&)>& w) {
    ChartProfile out = a;
    for (auto& [idx, f] : out.comp) f = cf_scale(f, w(idx));
    return out;
}

ChartProductResult cp_product(const ChartProfile& a, const ChartProfile& b, int G,
                              int max_degree) {
    if (a.mu != b.mu || a.ell != b.ell)
        throw ShapeMismatch("chart product across different charts");
    ChartProductResult out;
    out.value = chart_like(a);
    for (const auto& [i1, f1] : a.comp) {
        for (const auto& [i2, f2] : b.comp) {
            SpecIndex idx = i1 + i2;
            bool truncated = false;
            for (int mu = 0; mu < idx.m(); ++mu)
                if (idx.gamma[mu] > G) truncated = true;
            if (truncated) continue;
            ChartField prod = cf_product(f1, f2, a.n_nodes);
            for (const auto& t : prod.terms)
                if (int(t.poly.size()) - 1 > max_degree)
                    throw AlgebraError("chart product degree cap exceeded");
            if (idx.zero_g()) {
                // rectification content: record its plateau magnitude and drop
                double mass = 0.0;
                for (const auto& t : prod.terms)
                    if (t.wb == 0 && t.wc == 0)
                        for (const auto& pj : t.poly)
                            for (const auto& M : pj)
                                mass = std::max(mass, M.size() ? M.cwiseAbs().maxCoeff() : 0.0);
                out.rectification_mass += mass;
                continue;
            }
            auto it = out.value.comp.find(idx);
            if (it == out.value.comp.end())
                out.value.comp.emplace(idx, std::move(prod));
            else
                it->second = cf_add(it->second, prod);
        }
    }
    return out;
}

ChartProfile cp_dx(const ChartProfile& a) {
    ChartProfile out = chart_like(a);
    for (const auto& [idx, f] : a.comp) out.comp.emplace(idx, cf_ds(f));
    return out;
}

ChartProfile cp_dt(const ChartProfile& a) {
    ChartProfile out = chart_like(a);
    // d/dt|_x = d/dt|_s - speed(t) * d/ds
    std::vector<cplx> neg_speed(a.n_nodes);
    for (int k = 0; k < a.n_nodes; ++k) neg_speed[k] = -a.path.eval_dt(a.node_t(k));
    for (const auto& [idx, f] : a.comp) {
        ChartField d = cf_dt_at_fixed_s(f, a.t0, a.t1);
        d = cf_add(d, cf_scale_series(cf_ds(f), neg_speed));
        out.comp.emplace(idx, std::move(d));
    }
    return out;
}

} // namespace cgo
