#ifndef WARPSCAT_PROFILE_HPP
#define WARPSCAT_PROFILE_HPP

// Radial warp profiles r(s) for product-type manifolds with two ends.
// A profile owns the warp function, its first two derivatives and a sample
// grid; power-law profiles are exact polynomial/power evaluations, sampled
// profiles interpolate with natural cubic splines.

#include <array>
#include <cmath>
#include <cstddef>
#include <deque>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "warpscat/detail/numerics.hpp"

namespace warpscat {

// Two power-law ends r(s) = tau_minus * (-s)^beta_minus for s <= -1 and
// r(s) = tau_plus * s^beta_plus for s >= 1, blended smoothly in between.
struct PowerLawSpec {
    double beta_minus = 1.0;
    double tau_minus = 1.0;
    double beta_plus = 1.0;
    double tau_plus = 1.0;
};

struct ProfilePoint {
    double r = 0.0;
    double rdot = 0.0;
    double rddot = 0.0;
};

enum class ProfileKind { power_law, sampled, conformal_reparam };

class Profile {
public:
    // Sampled profile; derivative arrays are optional and fall back to the
    // spline derivatives of r when absent.
    static Profile sampled(int dim, std::vector<double> grid, std::vector<double> r,
                           std::optional<std::vector<double>> rdot = std::nullopt,
                           std::optional<std::vector<double>> rddot = std::nullopt,
                           ProfileKind kind = ProfileKind::sampled) {
        Profile p;
        p.n_ = check_dim(dim);
        p.kind_ = kind;
        p.s_ = std::move(grid);
        p.r_ = std::move(r);
        if (p.s_.size() != p.r_.size() || p.s_.size() < 3)
            throw std::invalid_argument("Profile: grid/value size mismatch");
        for (double v : p.r_)
            if (!(v > 0.0)) throw std::invalid_argument("Profile: warp must be positive");
        p.sp_r_ = detail::CubicSpline(p.s_, p.r_);
        if (rdot) {
            if (rdot->size() != p.s_.size())
                throw std::invalid_argument("Profile: rdot size mismatch");
            p.rdot_ = std::move(*rdot);
            p.sp_rdot_ = detail::CubicSpline(p.s_, p.rdot_);
            p.has_deriv_arrays_ = true;
        } else {
            p.rdot_.resize(p.s_.size());
            for (std::size_t i = 0; i < p.s_.size(); ++i) p.rdot_[i] = p.sp_r_.deriv(p.s_[i]);
        }
        if (rddot) {
            if (rddot->size() != p.s_.size())
                throw std::invalid_argument("Profile: rddot size mismatch");
            p.rddot_ = std::move(*rddot);
            p.sp_rddot_ = detail::CubicSpline(p.s_, p.rddot_);
        } else {
            if (rdot) p.has_deriv_arrays_ = false;  // need both arrays to trust them
            p.rddot_.resize(p.s_.size());
            for (std::size_t i = 0; i < p.s_.size(); ++i) p.rddot_[i] = p.sp_r_.deriv2(p.s_[i]);
        }
        return p;
    }

    // Exact-callable profile: evaluation bypasses the splines entirely, the
    // arrays are kept for emission and windowed scans.
    static Profile from_callables(int dim, std::vector<double> grid,
                                  const std::function<ProfilePoint(double)>& eval,
                                  ProfileKind kind = ProfileKind::sampled) {
        std::vector<double> r(grid.size()), rdot(grid.size()), rddot(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const ProfilePoint q = eval(grid[i]);
            r[i] = q.r;
            rdot[i] = q.rdot;
            rddot[i] = q.rddot;
        }
        Profile p = sampled(dim, std::move(grid), std::move(r), std::move(rdot),
                            std::move(rddot), kind);
        p.exact_ = eval;
        p.has_deriv_arrays_ = true;
        return p;
    }

    // Power-law profile with a reshaped interior: the callable rules inside
    // the grid window, the base's exact ends continue beyond it. The caller
    // must keep the deformation compactly supported inside the window, or
    // the continuation lies.
    static Profile power_law_interior(const Profile& base,
                                      const std::function<ProfilePoint(double)>& eval) {
        if (base.kind_ != ProfileKind::power_law || !base.law_)
            throw std::invalid_argument("power_law_interior: base must be a power-law profile");
        Profile p = from_callables(base.n_, base.s_, eval, ProfileKind::power_law);
        p.law_ = base.law_;
        p.blend_ = base.blend_;
        return p;
    }

    int dim() const { return n_; }
    ProfileKind kind() const { return kind_; }
    double s_min() const { return s_.front(); }
    double s_max() const { return s_.back(); }
    const std::vector<double>& grid() const { return s_; }
    const std::vector<double>& r_values() const { return r_; }
    const std::vector<double>& rdot_values() const { return rdot_; }
    const std::vector<double>& rddot_values() const { return rddot_; }
    const std::optional<PowerLawSpec>& law() const { return law_; }

    // Power-law profiles evaluate anywhere; sampled ones are restricted to
    // their grid range.
    ProfilePoint evaluate(double s) const {
        if (kind_ == ProfileKind::power_law) {
            if (exact_ && s >= s_.front() && s <= s_.back()) return exact_(s);
            return eval_power_law(s);
        }
        if (s < s_.front() - 1e-12 || s > s_.back() + 1e-12)
            throw std::out_of_range("Profile: s outside sampled range");
        if (exact_) return exact_(s);
        ProfilePoint out;
        out.r = sp_r_(s);
        if (has_deriv_arrays_) {
            out.rdot = sp_rdot_(s);
            out.rddot = sp_rddot_(s);
        } else {
            out.rdot = sp_r_.deriv(s);
            out.rddot = sp_r_.deriv2(s);
        }
        if (!(out.r > 0.0)) throw std::domain_error("Profile: interpolated warp not positive");
        return out;
    }

    // True when s is inside the evaluable range.
    bool in_range(double s) const {
        if (kind_ == ProfileKind::power_law) return true;
        return s >= s_.front() - 1e-12 && s <= s_.back() + 1e-12;
    }

    double clamp_lo(double s) const {
        return kind_ == ProfileKind::power_law ? s : std::max(s, s_.front());
    }
    double clamp_hi(double s) const {
        return kind_ == ProfileKind::power_law ? s : std::min(s, s_.back());
    }

    friend Profile build_power_law(int dim, const PowerLawSpec& spec, double grid_step,
                                   double half_length);

private:
    static int check_dim(int dim) {
        if (dim < 2) throw std::invalid_argument("Profile: dimension must be >= 2");
        return dim;
    }

    ProfilePoint eval_power_law(double s) const {
        const PowerLawSpec& c = *law_;
        ProfilePoint out;
        if (s >= 1.0) {
            out.r = c.tau_plus * std::pow(s, c.beta_plus);
            out.rdot = c.tau_plus * c.beta_plus * std::pow(s, c.beta_plus - 1.0);
            out.rddot =
                c.tau_plus * c.beta_plus * (c.beta_plus - 1.0) * std::pow(s, c.beta_plus - 2.0);
        } else if (s <= -1.0) {
            const double t = -s;
            out.r = c.tau_minus * std::pow(t, c.beta_minus);
            out.rdot = -c.tau_minus * c.beta_minus * std::pow(t, c.beta_minus - 1.0);
            out.rddot = c.tau_minus * c.beta_minus * (c.beta_minus - 1.0) *
                        std::pow(t, c.beta_minus - 2.0);
        } else {
            out.r = blend_[0] + s * (blend_[1] + s * (blend_[2] + s * (blend_[3] +
                        s * (blend_[4] + s * blend_[5]))));
            out.rdot = blend_[1] + s * (2.0 * blend_[2] + s * (3.0 * blend_[3] +
                           s * (4.0 * blend_[4] + s * 5.0 * blend_[5])));
            out.rddot = 2.0 * blend_[2] + s * (6.0 * blend_[3] +
                            s * (12.0 * blend_[4] + s * 20.0 * blend_[5]));
        }
        return out;
    }

    int n_ = 2;
    ProfileKind kind_ = ProfileKind::sampled;
    std::vector<double> s_, r_, rdot_, rddot_;
    std::optional<PowerLawSpec> law_;
    std::array<double, 6> blend_{};
    detail::CubicSpline sp_r_, sp_rdot_, sp_rddot_;
    bool has_deriv_arrays_ = false;
    std::function<ProfilePoint(double)> exact_;
};

namespace detail {

// Solve a dense 6x6 system by Gaussian elimination with partial pivoting.
inline std::array<double, 6> solve6(std::array<std::array<double, 6>, 6> a,
                                    std::array<double, 6> b) {
    for (int col = 0; col < 6; ++col) {
        int piv = col;
        for (int row = col + 1; row < 6; ++row)
            if (std::abs(a[row][col]) > std::abs(a[piv][col])) piv = row;
        std::swap(a[col], a[piv]);
        std::swap(b[col], b[piv]);
        if (std::abs(a[col][col]) < 1e-300) throw std::runtime_error("solve6: singular system");
        for (int row = col + 1; row < 6; ++row) {
            const double f = a[row][col] / a[col][col];
            for (int k = col; k < 6; ++k) a[row][k] -= f * a[col][k];
            b[row] -= f * b[col];
        }
    }
    std::array<double, 6> x{};
    for (int row = 5; row >= 0; --row) {
        double acc = b[row];
        for (int k = row + 1; k < 6; ++k) acc -= a[row][k] * x[k];
        x[row] = acc / a[row][row];
    }
    return x;
}

}  // namespace detail

// Build a two-ended power-law profile.  The ends are exact; on (-1, 1) the
// unique quintic matching value and two derivatives at s = +-1 is used, so
// the result is C2 across the joins.  Throws if the blend dips to <= 0.
inline Profile build_power_law(int dim, const PowerLawSpec& spec, double grid_step = 0.01,
                               double half_length = 200.0) {
    if (!(spec.tau_minus > 0.0) || !(spec.tau_plus > 0.0))
        throw std::invalid_argument("build_power_law: tau must be positive");
    if (!(grid_step > 0.0) || !(half_length > 1.0))
        throw std::invalid_argument("build_power_law: bad grid parameters");

    Profile p;
    p.n_ = Profile::check_dim(dim);
    p.kind_ = ProfileKind::power_law;
    p.law_ = spec;

    // Hermite data at the joins from the exact ends.
    const auto end_data = [&spec](double s) {
        ProfilePoint q;
        if (s > 0.0) {
            q.r = spec.tau_plus * std::pow(s, spec.beta_plus);
            q.rdot = spec.tau_plus * spec.beta_plus * std::pow(s, spec.beta_plus - 1.0);
            q.rddot = spec.tau_plus * spec.beta_plus * (spec.beta_plus - 1.0) *
                      std::pow(s, spec.beta_plus - 2.0);
        } else {
            const double t = -s;
            q.r = spec.tau_minus * std::pow(t, spec.beta_minus);
            q.rdot = -spec.tau_minus * spec.beta_minus * std::pow(t, spec.beta_minus - 1.0);
            q.rddot = spec.tau_minus * spec.beta_minus * (spec.beta_minus - 1.0) *
                      std::pow(t, spec.beta_minus - 2.0);
        }
        return q;
    };
    const ProfilePoint lo = end_data(-1.0), hi = end_data(1.0);

    std::array<std::array<double, 6>, 6> m{};
    std::array<double, 6> rhs{};
    const auto fill_rows = [&m, &rhs](int base, double s, const ProfilePoint& q) {
        m[base] = {1.0, s, s * s, s * s * s, s * s * s * s, s * s * s * s * s};
        m[base + 1] = {0.0, 1.0, 2.0 * s, 3.0 * s * s, 4.0 * s * s * s, 5.0 * s * s * s * s};
        m[base + 2] = {0.0, 0.0, 2.0, 6.0 * s, 12.0 * s * s, 20.0 * s * s * s};
        rhs[base] = q.r;
        rhs[base + 1] = q.rdot;
        rhs[base + 2] = q.rddot;
    };
    fill_rows(0, -1.0, lo);
    fill_rows(3, 1.0, hi);
    p.blend_ = detail::solve6(m, rhs);

    // positivity of the blend
    for (int i = 0; i <= 4000; ++i) {
        const double s = -1.0 + 2.0 * static_cast<double>(i) / 4000.0;
        if (!(p.eval_power_law(s).r > 0.0))
            throw std::domain_error("build_power_law: blend is not positive on (-1, 1)");
    }

    const auto count = static_cast<std::size_t>(std::llround(2.0 * half_length / grid_step)) + 1;
    p.s_ = detail::linspace(-half_length, half_length, count);
    p.r_.resize(count);
    p.rdot_.resize(count);
    p.rddot_.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        const ProfilePoint q = p.eval_power_law(p.s_[i]);
        p.r_[i] = q.r;
        p.rdot_[i] = q.rdot;
        p.rddot_[i] = q.rddot;
    }
    return p;
}

// Smallest ratio bound m with r(s0)/m <= r(s) <= m * r(s0) for all grid pairs
// with |s - s0| <= half_window (window clipped to the sampled range).
// Returns +inf when the ratio exceeds 1e12.
inline double local_boundedness_constant(const Profile& p, double half_window = 2.0) {
    const auto& s = p.grid();
    const auto& r = p.r_values();
    const std::size_t n = s.size();

    // monotonic deques for sliding max / min over the asymmetric index window
    std::deque<std::size_t> maxq, minq;
    std::size_t lo = 0, hi = 0;
    double m = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        while (hi < n && s[hi] <= s[i] + half_window + 1e-12) {
            while (!maxq.empty() && r[maxq.back()] <= r[hi]) maxq.pop_back();
            maxq.push_back(hi);
            while (!minq.empty() && r[minq.back()] >= r[hi]) minq.pop_back();
            minq.push_back(hi);
            ++hi;
        }
        while (s[lo] < s[i] - half_window - 1e-12) {
            if (!maxq.empty() && maxq.front() == lo) maxq.pop_front();
            if (!minq.empty() && minq.front() == lo) minq.pop_front();
            ++lo;
        }
        m = std::max(m, r[maxq.front()] / r[i]);
        m = std::max(m, r[i] / r[minq.front()]);
    }
    return m > 1e12 ? std::numeric_limits<double>::infinity() : m;
}

}  // namespace warpscat

#endif
