#ifndef WARPSCAT_WARPED_GEOMETRY_HPP
#define WARPSCAT_WARPED_GEOMETRY_HPP

// Curvature data and geometric lower-bound proxies for warped products
// g = ds^2 + r(s)^2 g_sphere.  Everything radial reduces to scans of r and
// its first two derivatives:
//
//   sectional, plane containing d/ds:   -rddot / r
//   sectional, plane inside the fiber:  (1 - rdot^2) / r^2      (dim >= 3)
//   Ricci eigenvalue along d/ds:        -(dim-1) rddot / r
//   Ricci eigenvalue along the fiber:   (dim-2)(1-rdot^2)/r^2 - rddot/r
//
// kappa(s) is a windowed curvature scale: the max over |t - s| <= 2 of
// { |rddot|/r, (1+rdot^2)/r^2, 1 }, with the middle term dropped in
// dimension 2.  The injectivity proxy is C0 * min(kappa^{-1/2}, r); the
// scale field r0 clamps the same quantity into (0, 1].

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>
#include <vector>

#include "warpscat/profile.hpp"

namespace warpscat {

struct CurvatureSample {
    double s = 0.0;
    double sec_radial = 0.0;     // plane containing the axis
    double sec_spherical = 0.0;  // plane tangent to the fiber; NaN in dim 2
    double ric_radial = 0.0;
    double ric_spherical = 0.0;
    double ric_minus = 0.0;  // lowest Ricci eigenvalue
};

struct GeometryConstants {
    double C0 = 1.0;  // injectivity proxy scale
    double c = 1.0;   // harmonic-radius scale
    double C1 = 1.0;  // curvature comparison scale (echoed in reports)
};

struct GeometryBounds {
    int dim = 2;
    GeometryConstants constants;
    std::vector<double> s;
    std::vector<double> kappa;
    std::vector<double> inj_lb;
    std::vector<double> r0;
    std::vector<double> harm_lb;
};

inline CurvatureSample curvature(const Profile& p, double s) {
    const ProfilePoint q = p.evaluate(s);
    const int n = p.dim();
    CurvatureSample out;
    out.s = s;
    out.sec_radial = -q.rddot / q.r;
    if (n >= 3) {
        out.sec_spherical = (1.0 - q.rdot * q.rdot) / (q.r * q.r);
    } else {
        out.sec_spherical = std::numeric_limits<double>::quiet_NaN();
    }
    out.ric_radial = -(n - 1) * q.rddot / q.r;
    if (n >= 3) {
        out.ric_spherical = (n - 2) * (1.0 - q.rdot * q.rdot) / (q.r * q.r) - q.rddot / q.r;
    } else {
        out.ric_spherical = out.sec_radial;  // dim 2: Ricci is a multiple of the metric
    }
    out.ric_minus = std::min(out.ric_radial, out.ric_spherical);
    return out;
}

namespace detail {

inline double kappa_node(double r, double rdot, double rddot, int dim) {
    double v = std::max(std::abs(rddot) / r, 1.0);
    if (dim >= 3) v = std::max(v, (1.0 + rdot * rdot) / (r * r));
    return v;
}

}  // namespace detail

// Windowed curvature scale at s0.  The window is clipped to the sample grid;
// the scan runs over grid nodes, which is also how the sampled variant in
// r0_function is built, so the two agree exactly.
inline double kappa(const Profile& p, double s0, double half_window = 2.0) {
    const auto& s = p.grid();
    const auto& r = p.r_values();
    const auto& rd = p.rdot_values();
    const auto& rdd = p.rddot_values();
    const double lo = s0 - half_window, hi = s0 + half_window;
    if (hi < s.front() || lo > s.back())
        throw std::out_of_range("kappa: window outside profile range");
    double v = 1.0;
    const auto first = std::lower_bound(s.begin(), s.end(), lo - 1e-12);
    for (auto it = first; it != s.end() && *it <= hi + 1e-12; ++it) {
        const auto i = static_cast<std::size_t>(it - s.begin());
        v = std::max(v, detail::kappa_node(r[i], rd[i], rdd[i], p.dim()));
    }
    return v;
}

inline double inj_lower_bound(const Profile& p, double s,
                              const GeometryConstants& constants = {}) {
    const double k = kappa(p, s);
    return constants.C0 * std::min(1.0 / std::sqrt(k), p.evaluate(s).r);
}

// inf of a sampled function over [x - delta, x + delta], window clipped to
// the grid.  Node resolution: the inf runs over grid nodes.
inline double homogenized_inf(const std::vector<double>& grid, const std::vector<double>& values,
                              double x, double delta) {
    if (grid.size() != values.size() || grid.size() < 2)
        throw std::invalid_argument("homogenized_inf: bad sampled function");
    if (!(delta >= 0.0)) throw std::invalid_argument("homogenized_inf: negative window");
    const double lo = x - delta, hi = x + delta;
    if (hi < grid.front() - 1e-12 || lo > grid.back() + 1e-12)
        throw std::out_of_range("homogenized_inf: window outside sampled range");
    double v = std::numeric_limits<double>::infinity();
    const auto first = std::lower_bound(grid.begin(), grid.end(), lo - 1e-12);
    for (auto it = first; it != grid.end() && *it <= hi + 1e-12; ++it)
        v = std::min(v, values[static_cast<std::size_t>(it - grid.begin())]);
    // narrow windows between nodes fall back to the bracketing nodes
    const auto up = std::upper_bound(grid.begin(), grid.end(), x);
    if (up != grid.end()) v = std::min(v, values[static_cast<std::size_t>(up - grid.begin())]);
    if (up != grid.begin())
        v = std::min(v, values[static_cast<std::size_t>(up - grid.begin()) - 1]);
    return v;
}

// Homogenized radius: sup over delta > 0 of min(delta, inf of f over the
// delta-ball).  f is the sampled injectivity proxy.  delta is capped by the
// distance from x to the sampled range boundary (conservative).  Found by
// bisection on delta - inf(delta), which changes sign monotonically.
inline double iota(const std::vector<double>& grid, const std::vector<double>& inj_lb, double x) {
    if (grid.size() != inj_lb.size() || grid.size() < 2)
        throw std::invalid_argument("iota: bad sampled function");
    if (x < grid.front() - 1e-12 || x > grid.back() + 1e-12)
        throw std::out_of_range("iota: point outside sampled range");
    const double delta_max = std::max(1e-9, std::min(x - grid.front(), grid.back() - x));
    const auto gap = [&](double d) { return d - homogenized_inf(grid, inj_lb, x, d); };
    if (gap(delta_max) <= 0.0) return delta_max;  // capped by the available window
    const double tiny = 1e-9 * delta_max;
    if (gap(tiny) >= 0.0) return homogenized_inf(grid, inj_lb, x, tiny);
    const double dstar = detail::bisect(gap, tiny, delta_max, 1e-12 * std::max(1.0, delta_max));
    return std::min(dstar, homogenized_inf(grid, inj_lb, x, dstar));
}

// Sampled geometric bounds over the whole profile grid.  kappa uses a
// sliding window max over grid nodes; r0 = clamp(C0 * min(r, kappa^{-1/2}))
// into (0, 1]; harm_lb = c * r0.
inline GeometryBounds r0_function(const Profile& p, const GeometryConstants& constants = {},
                                  double half_window = 2.0) {
    const auto& s = p.grid();
    const auto& r = p.r_values();
    const auto& rd = p.rdot_values();
    const auto& rdd = p.rddot_values();
    const std::size_t count = s.size();

    GeometryBounds out;
    out.dim = p.dim();
    out.constants = constants;
    out.s = s;
    out.kappa.resize(count);
    out.inj_lb.resize(count);
    out.r0.resize(count);
    out.harm_lb.resize(count);

    std::vector<double> node(count);
    for (std::size_t i = 0; i < count; ++i)
        node[i] = detail::kappa_node(r[i], rd[i], rdd[i], p.dim());

    std::deque<std::size_t> maxq;
    std::size_t lo = 0, hi = 0;
    for (std::size_t i = 0; i < count; ++i) {
        while (hi < count && s[hi] <= s[i] + half_window + 1e-12) {
            while (!maxq.empty() && node[maxq.back()] <= node[hi]) maxq.pop_back();
            maxq.push_back(hi);
            ++hi;
        }
        while (s[lo] < s[i] - half_window - 1e-12) {
            if (!maxq.empty() && maxq.front() == lo) maxq.pop_front();
            ++lo;
        }
        out.kappa[i] = std::max(1.0, node[maxq.front()]);
        out.inj_lb[i] = constants.C0 * std::min(1.0 / std::sqrt(out.kappa[i]), r[i]);
        out.r0[i] = std::min(out.inj_lb[i], 1.0);
        if (!(out.r0[i] > 0.0)) throw std::domain_error("r0_function: scale collapsed to zero");
        out.harm_lb[i] = constants.c * out.r0[i];
    }
    return out;
}

}  // namespace warpscat

#endif
