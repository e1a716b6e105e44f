// numerics.hpp — small shared numerical utilities: uniform-grid time series
// with Hermite dense output, the plateau bump, log-log power fits.

#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <vector>

namespace cgo {

using cplx = std::complex<double>;

inline std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = a + (b - a) * (n == 1 ? 0.0 : double(i) / (n - 1));
    return v;
}

inline std::vector<double> logspace(double a, double b, int n) {
    std::vector<double> v(n);
    const double la = std::log(a), lb = std::log(b);
    for (int i = 0; i < n; ++i) v[i] = std::exp(la + (lb - la) * (n == 1 ? 0.0 : double(i) / (n - 1)));
    return v;
}

// ---------------------------------------------------------------------------
// Smooth plateau bump: identically 1 for |q| <= 1/3, identically 0 for
// |q| >= 2/3, mollifier transition exp(-1/y) in between. Value and first two
// derivatives in closed form; all three are needed when chart fields are
// differentiated twice.
// ---------------------------------------------------------------------------
namespace bump_detail {
inline double f(double y) { return y > 0.0 ? std::exp(-1.0 / y) : 0.0; }
inline double f1(double y) { return y > 0.0 ? f(y) / (y * y) : 0.0; }
inline double f2(double y) {
    if (y <= 0.0) return 0.0;
    return f(y) * (1.0 - 2.0 * y) / (y * y * y * y);
}
} // namespace bump_detail

struct SmoothStep {
    // S(y): 0 for y<=0, 1 for y>=1, C^inf monotone in between.
    static double value(double y) {
        using namespace bump_detail;
        if (y <= 0.0) return 0.0;
        if (y >= 1.0) return 1.0;
        const double a = f(y), b = f(1.0 - y);
        return a / (a + b);
    }
    static double d1(double y) {
        using namespace bump_detail;
        if (y <= 0.0 || y >= 1.0) return 0.0;
        const double a = f(y), b = f(1.0 - y);
        const double a1 = f1(y), b1 = -f1(1.0 - y);
        const double s = a + b;
        return (a1 * s - a * (a1 + b1)) / (s * s);
    }
    static double d2(double y) {
        using namespace bump_detail;
        if (y <= 0.0 || y >= 1.0) return 0.0;
        const double a = f(y), b = f(1.0 - y);
        const double a1 = f1(y), b1 = -f1(1.0 - y);
        const double a2 = f2(y), b2 = f2(1.0 - y);
        const double s = a + b, s1 = a1 + b1, s2 = a2 + b2;
        return (a2 * s - a * s2) / (s * s) - 2.0 * s1 * (a1 * s - a * s1) / (s * s * s);
    }
};

// Plateau bump in the chart coordinate s with half-width s0:
// 1 on |s| <= s0/3, 0 on |s| >= 2*s0/3.
struct Bump {
    double s0 = 1.0;
    double value(double s) const {
        const double q = std::abs(s) / s0;
        return SmoothStep::value((2.0 / 3.0 - q) * 3.0);
    }
    double d1(double s) const {
        const double q = std::abs(s) / s0;
        const double sgn = (s >= 0.0) ? 1.0 : -1.0;
        return SmoothStep::d1((2.0 / 3.0 - q) * 3.0) * (-3.0 / s0) * sgn;
    }
    double d2(double s) const {
        const double q = std::abs(s) / s0;
        return SmoothStep::d2((2.0 / 3.0 - q) * 3.0) * (9.0 / (s0 * s0));
    }
};

// ---------------------------------------------------------------------------
// Uniform-grid series on [0,T] with cubic-Hermite dense output. Slopes come
// from 4th-order centered differences (one-sided at the ends).
// ---------------------------------------------------------------------------
template <class T>
struct TimeSeries {
    double t0 = 0.0, t1 = 1.0;
    std::vector<T> y;

    TimeSeries() = default;
    TimeSeries(double a, double b, std::vector<T> v) : t0(a), t1(b), y(std::move(v)) {}

    int size() const { return int(y.size()); }
    double dt() const { return (t1 - t0) / double(y.size() - 1); }
    double node(int i) const { return t0 + dt() * i; }

    T slope(int i) const {
        const int n = size();
        const double h = dt();
        assert(n >= 2);
        if (n < 5) {
            if (i == 0) return (y[1] - y[0]) * (1.0 / h);
            if (i == n - 1) return (y[n - 1] - y[n - 2]) * (1.0 / h);
            return (y[i + 1] - y[i - 1]) * (0.5 / h);
        }
        if (i >= 2 && i <= n - 3)
            return (y[i - 2] - y[i + 2] + 8.0 * (y[i + 1] - y[i - 1])) * (1.0 / (12.0 * h));
        if (i == 0)
            return (-25.0 * y[0] + 48.0 * y[1] - 36.0 * y[2] + 16.0 * y[3] - 3.0 * y[4]) * (1.0 / (12.0 * h));
        if (i == 1)
            return (-3.0 * y[0] - 10.0 * y[1] + 18.0 * y[2] - 6.0 * y[3] + y[4]) * (1.0 / (12.0 * h));
        if (i == n - 2)
            return (3.0 * y[n - 1] + 10.0 * y[n - 2] - 18.0 * y[n - 3] + 6.0 * y[n - 4] - y[n - 5]) * (1.0 / (12.0 * h));
        return (25.0 * y[n - 1] - 48.0 * y[n - 2] + 36.0 * y[n - 3] - 16.0 * y[n - 4] + 3.0 * y[n - 5]) * (1.0 / (12.0 * h));
    }

    T eval(double t) const {
        const int n = size();
        const double h = dt();
        double u = (t - t0) / h;
        int i = int(std::floor(u));
        i = std::clamp(i, 0, n - 2);
        const double s = u - i;
        const T m0 = slope(i) * h, m1 = slope(i + 1) * h;
        const double s2 = s * s, s3 = s2 * s;
        return y[i] * (2 * s3 - 3 * s2 + 1) + m0 * (s3 - 2 * s2 + s) +
               y[i + 1] * (-2 * s3 + 3 * s2) + m1 * (s3 - s2);
    }

    T eval_dt(double t) const {
        const int n = size();
        const double h = dt();
        double u = (t - t0) / h;
        int i = int(std::floor(u));
        i = std::clamp(i, 0, n - 2);
        const double s = u - i;
        const T m0 = slope(i) * h, m1 = slope(i + 1) * h;
        const double s2 = s * s;
        return (y[i] * (6 * s2 - 6 * s) + m0 * (3 * s2 - 4 * s + 1) +
                y[i + 1] * (-6 * s2 + 6 * s) + m1 * (3 * s2 - 2 * s)) * (1.0 / h);
    }
};

// Uniform-grid series carrying exact slopes (from the generating ODE), so the
// dense output is genuine 4th-order Hermite.
template <class T>
struct HermiteSeries {
    double t0 = 0.0, t1 = 1.0;
    std::vector<T> y;
    std::vector<T> dy;

    int size() const { return int(y.size()); }
    double dt() const { return (t1 - t0) / double(y.size() - 1); }
    double node(int i) const { return t0 + dt() * i; }

    T eval(double t) const {
        const int n = size();
        const double h = dt();
        double u = (t - t0) / h;
        int i = std::clamp(int(std::floor(u)), 0, n - 2);
        const double s = u - i, s2 = s * s, s3 = s2 * s;
        const T m0 = dy[i] * h, m1 = dy[i + 1] * h;
        return y[i] * (2 * s3 - 3 * s2 + 1) + m0 * (s3 - 2 * s2 + s) +
               y[i + 1] * (-2 * s3 + 3 * s2) + m1 * (s3 - s2);
    }
    T eval_dt(double t) const {
        const int n = size();
        const double h = dt();
        double u = (t - t0) / h;
        int i = std::clamp(int(std::floor(u)), 0, n - 2);
        const double s = u - i, s2 = s * s;
        const T m0 = dy[i] * h, m1 = dy[i + 1] * h;
        return (y[i] * (6 * s2 - 6 * s) + m0 * (3 * s2 - 4 * s + 1) +
                y[i + 1] * (-6 * s2 + 6 * s) + m1 * (3 * s2 - 2 * s)) * (1.0 / h);
    }
};

// Hermite evaluation of a raw node vector on [t0, t1] without constructing a
// series object (hot paths); slopes by the same finite differences as
// TimeSeries.
template <class T>
T sampled_slope(const std::vector<T>& y, int k, double h) {
    const int n = int(y.size());
    if (n < 5) {
        if (k == 0) return (y[1] - y[0]) * (1.0 / h);
        if (k == n - 1) return (y[n - 1] - y[n - 2]) * (1.0 / h);
        return (y[k + 1] - y[k - 1]) * (0.5 / h);
    }
    if (k >= 2 && k <= n - 3)
        return (y[k - 2] - y[k + 2] + 8.0 * (y[k + 1] - y[k - 1])) * (1.0 / (12.0 * h));
    if (k == 0)
        return (-25.0 * y[0] + 48.0 * y[1] - 36.0 * y[2] + 16.0 * y[3] - 3.0 * y[4]) *
               (1.0 / (12.0 * h));
    if (k == 1)
        return (-3.0 * y[0] - 10.0 * y[1] + 18.0 * y[2] - 6.0 * y[3] + y[4]) * (1.0 / (12.0 * h));
    if (k == n - 2)
        return (3.0 * y[n - 1] + 10.0 * y[n - 2] - 18.0 * y[n - 3] + 6.0 * y[n - 4] - y[n - 5]) *
               (1.0 / (12.0 * h));
    return (25.0 * y[n - 1] - 48.0 * y[n - 2] + 36.0 * y[n - 3] - 16.0 * y[n - 4] +
            3.0 * y[n - 5]) *
           (1.0 / (12.0 * h));
}

template <class T>
T sampled_eval(const std::vector<T>& y, double t0, double t1, double t) {
    const int n = int(y.size());
    const double h = (t1 - t0) / double(n - 1);
    double u = (t - t0) / h;
    int i = std::clamp(int(std::floor(u)), 0, n - 2);
    const double a = u - i, a2 = a * a, a3 = a2 * a;
    const T m0 = sampled_slope(y, i, h) * h, m1 = sampled_slope(y, i + 1, h) * h;
    return y[i] * (2 * a3 - 3 * a2 + 1) + m0 * (a3 - 2 * a2 + a) + y[i + 1] * (-2 * a3 + 3 * a2) +
           m1 * (a3 - a2);
}

template <class T>
T sampled_eval_dt(const std::vector<T>& y, double t0, double t1, double t) {
    const int n = int(y.size());
    const double h = (t1 - t0) / double(n - 1);
    double u = (t - t0) / h;
    int i = std::clamp(int(std::floor(u)), 0, n - 2);
    const double a = u - i, a2 = a * a;
    const T m0 = sampled_slope(y, i, h) * h, m1 = sampled_slope(y, i + 1, h) * h;
    return (y[i] * (6 * a2 - 6 * a) + m0 * (3 * a2 - 4 * a + 1) + y[i + 1] * (-6 * a2 + 6 * a) +
            m1 * (3 * a2 - 2 * a)) *
           (1.0 / h);
}

// ---------------------------------------------------------------------------
// Least-squares log-log power fit: y ~ C x^slope. Samples <= zero_floor are
// treated as exact zeros; a fit is attempted only on positive samples.
// ---------------------------------------------------------------------------
struct PowerFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 1.0;
    bool exact = false;   // all samples at/below the zero floor
    bool valid = false;   // enough positive samples for a fit
};

inline PowerFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y,
                           double zero_floor = 1e-14) {
    PowerFit out;
    std::vector<double> lx, ly;
    for (size_t i = 0; i < x.size(); ++i) {
        if (y[i] > zero_floor) {
            lx.push_back(std::log(x[i]));
            ly.push_back(std::log(y[i]));
        }
    }
    if (lx.empty()) {
        out.exact = true;
        return out;
    }
    if (lx.size() < 3) return out;
    const int n = int(lx.size());
    double mx = 0, my = 0;
    for (int i = 0; i < n; ++i) { mx += lx[i]; my += ly[i]; }
    mx /= n; my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (int i = 0; i < n; ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
        syy += (ly[i] - my) * (ly[i] - my);
    }
    if (sxx <= 0) return out;
    out.slope = sxy / sxx;
    out.intercept = my - out.slope * mx;
    out.r2 = (syy > 0) ? (sxy * sxy) / (sxx * syy) : 1.0;
    out.valid = true;
    return out;
}

// Classic fixed-step RK4 for vector-like states (operator+, scalar *).
template <class State, class Rhs>
State rk4_step(const Rhs& rhs, double t, double h, const State& u) {
    const State k1 = rhs(t, u);
    const State k2 = rhs(t + 0.5 * h, u + k1 * (0.5 * h));
    const State k3 = rhs(t + 0.5 * h, u + k2 * (0.5 * h));
    const State k4 = rhs(t + h, u + k3 * h);
    return u + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
}

} // namespace cgo
