#ifndef WARPSCAT_DETAIL_NUMERICS_HPP
#define WARPSCAT_DETAIL_NUMERICS_HPP

// Small self-contained numerical kernels shared across the library:
// natural cubic spline, adaptive Simpson quadrature, an embedded
// Cash-Karp RK45 stepper, bisection, least-squares line fits and a
// compactly supported smooth bump.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

namespace warpscat::detail {

inline std::vector<double> linspace(double a, double b, std::size_t count) {
    if (count < 2) throw std::invalid_argument("linspace: need at least 2 points");
    std::vector<double> out(count);
    const double h = (b - a) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i) out[i] = a + h * static_cast<double>(i);
    out.back() = b;
    return out;
}

// Natural cubic spline on a strictly increasing grid.  C2 on the interior,
// value/deriv/deriv2 clamp to the end intervals outside the grid.
class CubicSpline {
public:
    CubicSpline() = default;

    CubicSpline(std::vector<double> x, std::vector<double> y)
        : x_(std::move(x)), y_(std::move(y)) {
        const std::size_t n = x_.size();
        if (n < 3 || y_.size() != n) throw std::invalid_argument("CubicSpline: need >= 3 nodes");
        for (std::size_t i = 0; i + 1 < n; ++i)
            if (!(x_[i] < x_[i + 1])) throw std::invalid_argument("CubicSpline: grid not increasing");

        // tridiagonal solve for interior second derivatives, natural ends
        m_.assign(n, 0.0);
        std::vector<double> diag(n, 2.0), rhs(n, 0.0), sub(n, 0.0), sup(n, 0.0);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double hl = x_[i] - x_[i - 1];
            const double hr = x_[i + 1] - x_[i];
            sub[i] = hl / (hl + hr);
            sup[i] = hr / (hl + hr);
            rhs[i] = 6.0 * ((y_[i + 1] - y_[i]) / hr - (y_[i] - y_[i - 1]) / hl) / (hl + hr);
        }
        for (std::size_t i = 2; i + 1 < n; ++i) {
            const double w = sub[i] / diag[i - 1];
            diag[i] -= w * sup[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
        for (std::size_t i = n - 2; i >= 1; --i) {
            m_[i] = (rhs[i] - sup[i] * (i + 2 < n ? m_[i + 1] : 0.0)) / diag[i];
            if (i == 1) break;
        }
    }

    double operator()(double x) const { return eval<0>(x); }
    double deriv(double x) const { return eval<1>(x); }
    double deriv2(double x) const { return eval<2>(x); }

    double x_front() const { return x_.front(); }
    double x_back() const { return x_.back(); }

private:
    template <int Order>
    double eval(double x) const {
        const std::size_t i = interval(x);
        const double h = x_[i + 1] - x_[i];
        const double a = (x_[i + 1] - x) / h;
        const double b = (x - x_[i]) / h;
        if constexpr (Order == 0) {
            return a * y_[i] + b * y_[i + 1] +
                   ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h * h / 6.0;
        } else if constexpr (Order == 1) {
            return (y_[i + 1] - y_[i]) / h +
                   ((3.0 * b * b - 1.0) * m_[i + 1] - (3.0 * a * a - 1.0) * m_[i]) * h / 6.0;
        } else {
            return a * m_[i] + b * m_[i + 1];
        }
    }

    std::size_t interval(double x) const {
        if (x <= x_[1]) return 0;
        if (x >= x_[x_.size() - 2]) return x_.size() - 2;
        const auto it = std::upper_bound(x_.begin(), x_.end(), x);
        return static_cast<std::size_t>(it - x_.begin()) - 1;
    }

    std::vector<double> x_, y_, m_;
};

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;  // estimated absolute error
};

// Adaptive Simpson with the usual 1/15 Richardson error control.
inline QuadratureResult integrate_adaptive(const std::function<double(double)>& f, double a,
                                           double b, double rel_tol = 1e-10,
                                           double abs_tol = 1e-14, int max_depth = 40) {
    struct Worker {
        const std::function<double(double)>& f;
        double abs_tol;
        double err = 0.0;
        double recurse(double a, double b, double fa, double fm, double fb, double whole,
                       double tol, int depth) {
            const double m = 0.5 * (a + b);
            const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
            const double flm = f(lm), frm = f(rm);
            const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            const double delta = left + right - whole;
            if (depth <= 0 || std::abs(delta) <= 15.0 * std::max(tol, abs_tol)) {
                err += std::abs(delta) / 15.0;
                return left + right + delta / 15.0;
            }
            return recurse(a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
                   recurse(m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
        }
    };
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    Worker w{f, abs_tol};
    const double tol0 = std::max(std::abs(whole) * rel_tol, abs_tol);
    QuadratureResult out;
    out.value = w.recurse(a, b, fa, fm, fb, whole, tol0, max_depth);
    out.error = w.err;
    return out;
}

// Embedded Cash-Karp RK45 with elementwise error control.
// rhs(s, y, dy) fills dy; integration runs from s0 to s1 (either direction).
template <std::size_t N>
void rk45_integrate(const std::function<void(double, const std::array<double, N>&,
                                             std::array<double, N>&)>& rhs,
                    std::array<double, N>& y, double s0, double s1, double rel_tol = 1e-9,
                    double abs_tol = 1e-12) {
    static constexpr double a2 = 0.2, a3 = 0.3, a4 = 0.6, a5 = 1.0, a6 = 0.875;
    static constexpr double b21 = 0.2;
    static constexpr double b31 = 3.0 / 40.0, b32 = 9.0 / 40.0;
    static constexpr double b41 = 0.3, b42 = -0.9, b43 = 1.2;
    static constexpr double b51 = -11.0 / 54.0, b52 = 2.5, b53 = -70.0 / 27.0, b54 = 35.0 / 27.0;
    static constexpr double b61 = 1631.0 / 55296.0, b62 = 175.0 / 512.0, b63 = 575.0 / 13824.0,
                            b64 = 44275.0 / 110592.0, b65 = 253.0 / 4096.0;
    static constexpr double c1 = 37.0 / 378.0, c3 = 250.0 / 621.0, c4 = 125.0 / 594.0,
                            c6 = 512.0 / 1771.0;
    static constexpr double d1 = c1 - 2825.0 / 27648.0, d3 = c3 - 18575.0 / 48384.0,
                            d4 = c4 - 13525.0 / 55296.0, d5 = -277.0 / 14336.0,
                            d6 = c6 - 0.25;

    const double dir = (s1 >= s0) ? 1.0 : -1.0;
    double s = s0;
    double h = dir * std::min(0.1, std::abs(s1 - s0));
    std::array<double, N> k1, k2, k3, k4, k5, k6, yt, yerr;

    std::size_t steps = 0;
    while (dir * (s1 - s) > 0.0) {
        if (++steps > 50'000'000) throw std::runtime_error("rk45: step limit exceeded");
        if (dir * (s + h - s1) > 0.0) h = s1 - s;

        rhs(s, y, k1);
        for (std::size_t i = 0; i < N; ++i) yt[i] = y[i] + h * b21 * k1[i];
        rhs(s + a2 * h, yt, k2);
        for (std::size_t i = 0; i < N; ++i) yt[i] = y[i] + h * (b31 * k1[i] + b32 * k2[i]);
        rhs(s + a3 * h, yt, k3);
        for (std::size_t i = 0; i < N; ++i)
            yt[i] = y[i] + h * (b41 * k1[i] + b42 * k2[i] + b43 * k3[i]);
        rhs(s + a4 * h, yt, k4);
        for (std::size_t i = 0; i < N; ++i)
            yt[i] = y[i] + h * (b51 * k1[i] + b52 * k2[i] + b53 * k3[i] + b54 * k4[i]);
        rhs(s + a5 * h, yt, k5);
        for (std::size_t i = 0; i < N; ++i)
            yt[i] = y[i] + h * (b61 * k1[i] + b62 * k2[i] + b63 * k3[i] + b64 * k4[i] +
                                b65 * k5[i]);
        rhs(s + a6 * h, yt, k6);

        double err_ratio = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            yt[i] = y[i] + h * (c1 * k1[i] + c3 * k3[i] + c4 * k4[i] + c6 * k6[i]);
            yerr[i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i]);
            const double scale = abs_tol + rel_tol * std::max(std::abs(y[i]), std::abs(yt[i]));
            err_ratio = std::max(err_ratio, std::abs(yerr[i]) / scale);
        }

        if (err_ratio <= 1.0) {
            s += h;
            y = yt;
            const double grow = (err_ratio > 1e-10) ? 0.9 * std::pow(err_ratio, -0.2) : 5.0;
            h *= std::min(5.0, grow);
        } else {
            h *= std::max(0.1, 0.9 * std::pow(err_ratio, -0.25));
            if (std::abs(h) < 1e-14 * std::max(1.0, std::abs(s)))
                throw std::runtime_error("rk45: step underflow");
        }
    }
}

// Bisection for f(x) = 0 on [lo, hi]; requires a sign change.
inline double bisect(const std::function<double(double)>& f, double lo, double hi,
                     double x_tol = 1e-12, int max_iter = 200) {
    double flo = f(lo), fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if (flo * fhi > 0.0) throw std::invalid_argument("bisect: no sign change on interval");
    for (int i = 0; i < max_iter && (hi - lo) > x_tol; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if (flo * fm < 0.0) {
            hi = mid;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    return 0.5 * (lo + hi);
}

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
};

inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_line: bad input");
    const double n = static_cast<double>(x.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double denom = n * sxx - sx * sx;
    if (std::abs(denom) < 1e-300) throw std::invalid_argument("fit_line: degenerate abscissae");
    LineFit out;
    out.slope = (n * sxy - sx * sy) / denom;
    out.intercept = (sy - out.slope * sx) / n;
    return out;
}

// C-infinity bump supported on (center - halfwidth, center + halfwidth),
// normalized to amp at the center.
struct SmoothBump {
    double center = 0.0;
    double halfwidth = 1.0;
    double amp = 1.0;

    double value(double s) const {
        const double y = (s - center) / halfwidth;
        if (std::abs(y) >= 1.0) return 0.0;
        return amp * std::exp(1.0 - 1.0 / (1.0 - y * y));
    }

    double deriv(double s) const {
        const double y = (s - center) / halfwidth;
        if (std::abs(y) >= 1.0) return 0.0;
        const double u = 1.0 - y * y;
        const double gp = -2.0 * y / (u * u);
        return value(s) * gp / halfwidth;
    }

    double deriv2(double s) const {
        const double y = (s - center) / halfwidth;
        if (std::abs(y) >= 1.0) return 0.0;
        const double u = 1.0 - y * y;
        const double gp = -2.0 * y / (u * u);
        const double gpp = -2.0 / (u * u) - 8.0 * y * y / (u * u * u);
        return value(s) * (gpp + gp * gp) / (halfwidth * halfwidth);
    }
};

inline double binomial(int n, int k) {
    if (k < 0 || n < 0 || k > n) return 0.0;
    k = std::min(k, n - k);
    double out = 1.0;
    for (int i = 1; i <= k; ++i) out = out * static_cast<double>(n - k + i) / static_cast<double>(i);
    return out;
}

}  // namespace warpscat::detail

#endif
