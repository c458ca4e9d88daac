#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "warpscat/channels.hpp"
#include "warpscat/detail/numerics.hpp"
#include "warpscat/profile.hpp"

namespace warpscat {

// Truncating the line at +-L failed the tail criterion for this wavenumber.
struct TruncationError : std::runtime_error {
    double suggested_L;
    TruncationError(const std::string& what, double suggestion)
        : std::runtime_error(what), suggested_L(suggestion) {}
};

struct SolveOptions {
    double domain_L = 200.0;
    // headroom below the 1e-6 flux-defect budget: per-step errors accumulate
    // over ~1e5 steps on +-200 sweeps at k = 10
    double rel_tol = 1e-10;
    double abs_tol = 1e-13;
    std::vector<double> breakpoints = {-1.0, 1.0};  // kinks of the potential
    bool wkb_tails = true;     // first-order asymptotic matching on analytic tails
    double threshold_k = 1e-3; // below this the result is flagged, not refused
};

struct ScatteringPoint {
    double k = 0.0;
    std::complex<double> t, r_left, r_right;
    double defect = 0.0;  // worst |1 - |t|^2 - |r|^2| over both incidence runs
    bool near_threshold = false;
};

struct ScatteringData {
    std::vector<double> k_grid;
    std::vector<std::complex<double>> t, r_left, r_right;
    std::vector<double> defect;
    double domain_L = 0.0;
    double max_defect = 0.0;
};

namespace detail {

struct BoundaryState {
    std::complex<double> u, du;    // outgoing state at +L
    std::complex<double> fp, dfp;  // e^{+iks}-referenced basis at -L
    std::complex<double> fm, dfm;  // e^{-iks}-referenced basis at -L
};

// free-wave boundary data at +-L, corrected to first WKB order when the tail
// is known in closed form; phase references are chosen so the states converge
// to e^{+-iks} at infinity
inline BoundaryState boundary_state(const std::function<double(double)>& w,
                                    const TailModel& tail_right, const TailModel& tail_left,
                                    double k, const SolveOptions& opt) {
    const std::complex<double> I(0.0, 1.0);
    const double L = opt.domain_L;
    BoundaryState bs;

    const auto wkb_usable = [&](const TailModel& tail) {
        return opt.wkb_tails && tail.analytic && std::abs(tail.value(L)) < 0.25 * k * k &&
               std::isfinite(tail.integral_from(L)) && std::isfinite(tail.integral_sq_from(L));
    };
    const auto refuse = [&](double wL) -> TruncationError {
        const double target = wkb_usable(tail_right) || wkb_usable(tail_left)
                                  ? 0.125 * k * k
                                  : 1e-8 * k * k;
        const double suggestion = L * std::sqrt(std::abs(wL) / target);
        return TruncationError("potential has not decayed at the truncation radius; "
                               "suggest domain_L >= " +
                                   std::to_string(suggestion),
                               suggestion);
    };

    if (wkb_usable(tail_right)) {
        const double wL = tail_right.value(L);
        const double p = std::sqrt(k * k - wL);
        const double phase = k * L + tail_right.integral_from(L) / (2.0 * k) +
                             tail_right.integral_sq_from(L) / (8.0 * k * k * k);
        bs.u = std::sqrt(k / p) * std::exp(I * phase);
        bs.du = bs.u * (I * p + tail_right.deriv(L) / (4.0 * p * p));
    } else {
        const double wL = w(L);
        if (std::abs(wL) > 1e-8 * k * k) throw refuse(wL);
        bs.u = std::exp(I * k * L);
        bs.du = I * k * bs.u;
    }

    if (wkb_usable(tail_left)) {
        const double wL = tail_left.value(L);
        const double p = std::sqrt(k * k - wL);
        const double phase = -k * L - tail_left.integral_from(L) / (2.0 * k) -
                             tail_left.integral_sq_from(L) / (8.0 * k * k * k);
        const double amp = std::sqrt(k / p);
        const double dw_ds = -tail_left.deriv(L);  // signed derivative at s = -L
        bs.fp = amp * std::exp(I * phase);
        bs.dfp = bs.fp * (I * p + dw_ds / (4.0 * p * p));
        bs.fm = amp * std::exp(-I * phase);
        bs.dfm = bs.fm * (-I * p + dw_ds / (4.0 * p * p));
    } else {
        const double wL = w(-L);
        if (std::abs(wL) > 1e-8 * k * k) throw refuse(wL);
        bs.fp = std::exp(-I * k * L);
        bs.dfp = I * k * bs.fp;
        bs.fm = std::exp(I * k * L);
        bs.dfm = -I * k * bs.fm;
    }
    return bs;
}

// integrate -u'' + w u = k^2 u from +L (pure outgoing) down to -L and expand
// in the incoming-side basis: u = a e^{iks} + b e^{-iks}
inline std::pair<std::complex<double>, std::complex<double>> transmit_run(
    const std::function<double(double)>& w, const TailModel& tail_right,
    const TailModel& tail_left, double k, const SolveOptions& opt) {
    const BoundaryState bs = boundary_state(w, tail_right, tail_left, k, opt);
    const double L = opt.domain_L;

    std::array<double, 4> y = {bs.u.real(), bs.u.imag(), bs.du.real(), bs.du.imag()};

    // split the sweep at potential kinks so the error control sees smooth
    // pieces; evaluations are nudged into the open segment so a jump at a
    // breakpoint contributes its one-sided limit
    std::vector<double> stops = {L};
    for (double b : opt.breakpoints)
        if (b > -L && b < L) stops.push_back(b);
    stops.push_back(-L);
    std::sort(stops.begin(), stops.end(), std::greater<>());
    for (std::size_t i = 0; i + 1 < stops.size(); ++i) {
        const double hi = stops[i], lo = stops[i + 1];
        const double nudge = 1e-10 * (1.0 + std::max(std::abs(hi), std::abs(lo)));
        if (hi - lo <= 2.0 * nudge) continue;
        const double in_hi = hi - nudge, in_lo = lo + nudge;
        const std::function<void(double, const std::array<double, 4>&, std::array<double, 4>&)>
            rhs = [&w, k, in_lo, in_hi](double s, const std::array<double, 4>& v,
                                        std::array<double, 4>& dv) {
                const double c = w(std::clamp(s, in_lo, in_hi)) - k * k;
                dv[0] = v[2];
                dv[1] = v[3];
                dv[2] = c * v[0];
                dv[3] = c * v[1];
            };
        detail::rk45_integrate<4>(rhs, y, hi, lo, opt.rel_tol, opt.abs_tol);
    }

    const std::complex<double> u(y[0], y[1]), du(y[2], y[3]);
    const std::complex<double> den = bs.fp * bs.dfm - bs.dfp * bs.fm;
    const std::complex<double> a = (u * bs.dfm - du * bs.fm) / den;
    const std::complex<double> b = (du * bs.fp - u * bs.dfp) / den;
    return {a, b};
}

}  // namespace detail

// Transmission and reflection amplitudes at one wavenumber: a left-incidence
// run and a mirrored right-incidence run through the same potential.
inline ScatteringPoint solve_stationary(const Channel& c, double k,
                                        const SolveOptions& opt = {}) {
    if (!(k > 0.0)) throw std::invalid_argument("wavenumber must be positive");
    ScatteringPoint out;
    out.k = k;
    out.near_threshold = k < opt.threshold_k;

    const auto [a, b] = detail::transmit_run(c.w_eff, c.tail_right, c.tail_left, k, opt);
    out.t = 1.0 / a;
    out.r_left = b / a;

    SolveOptions mirror = opt;
    mirror.breakpoints.clear();
    for (double s : opt.breakpoints) mirror.breakpoints.push_back(-s);
    const auto& weff = c.w_eff;
    const std::function<double(double)> wm = [weff](double s) { return weff(-s); };
    const auto [am, bm] = detail::transmit_run(wm, c.tail_left, c.tail_right, k, mirror);
    out.r_right = bm / am;

    const double d_left = std::abs(1.0 - std::norm(out.t) - std::norm(out.r_left));
    const double d_right = std::abs(1.0 - std::norm(1.0 / am) - std::norm(out.r_right));
    out.defect = std::max(d_left, d_right);
    return out;
}

// Amplitudes across a wavenumber grid; refuses channels whose effective
// potential is not short-range on both sides.
inline ScatteringData s_matrix(const Channel& c, const Profile& p,
                               const std::vector<double>& k_grid,
                               const SolveOptions& opt = {}) {
    const auto cls = classify(c, p);
    for (const auto& side : cls)
        if (side.short_range != Verdict::yes)
            throw std::domain_error(
                std::string("channel closed/unsupported: effective potential is not "
                            "short-range on the ") +
                (side.side == ChannelClassification::Side::left ? "left" : "right") + " side");

    ScatteringData data;
    data.k_grid = k_grid;
    data.domain_L = opt.domain_L;
    data.t.reserve(k_grid.size());
    for (double k : k_grid) {
        const ScatteringPoint pt = solve_stationary(c, k, opt);
        data.t.push_back(pt.t);
        data.r_left.push_back(pt.r_left);
        data.r_right.push_back(pt.r_right);
        data.defect.push_back(pt.defect);
        data.max_defect = std::max(data.max_defect, pt.defect);
    }
    return data;
}

// Smooth compactly supported spectral envelope exp(1 - 1/(1 - (kappa/width)^2)).
struct SpectralEnvelope {
    double width = 1.0;

    double value(double kappa) const {
        const double y = kappa / width;
        if (std::abs(y) >= 1.0) return 0.0;
        return std::exp(1.0 - 1.0 / (1.0 - y * y));
    }
};

struct OpennessVerdict {
    double indicator = 0.0;  // in [0, 1]
    bool open = false;
    double v_used = 0.0;
    double threshold = 0.5;
};

// Spectrally weighted transmission probability of a test state centered at
// velocity v: indicator = int |t|^2 B(k-v)^2 dk / int B(k-v)^2 dk. A large
// value witnesses an open left-to-right channel; a small value is never a
// proof of closedness, only of this particular state's reflection.
inline OpennessVerdict openness(const ScatteringData& data, double v,
                                SpectralEnvelope envelope = {}, double threshold = 0.5) {
    if (data.k_grid.size() < 4) throw std::invalid_argument("k grid too small");
    const double slack = 1e-9 * envelope.width;  // representation noise, not leakage
    if (data.k_grid.front() > v - envelope.width + slack ||
        data.k_grid.back() < v + envelope.width - slack)
        throw std::invalid_argument(
            "test-state spectrum leaks outside the computed k grid; widen the grid");

    std::vector<double> t2(data.k_grid.size());
    for (std::size_t i = 0; i < t2.size(); ++i) t2[i] = std::norm(data.t[i]);
    const detail::CubicSpline interp(data.k_grid, t2);

    const auto weighted = detail::integrate_adaptive(
        [&](double kappa) {
            const double b = envelope.value(kappa);
            return b * b * interp(v + kappa);
        },
        -envelope.width, envelope.width, 1e-10, 1e-14);
    const auto total = detail::integrate_adaptive(
        [&](double kappa) {
            const double b = envelope.value(kappa);
            return b * b;
        },
        -envelope.width, envelope.width, 1e-10, 1e-14);

    OpennessVerdict verdict;
    verdict.v_used = v;
    verdict.threshold = threshold;
    verdict.indicator = std::clamp(weighted.value / total.value, 0.0, 1.0);
    verdict.open = verdict.indicator > threshold;
    return verdict;
}

}  // namespace warpscat
