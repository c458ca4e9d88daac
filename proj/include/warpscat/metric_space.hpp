#ifndef WARPSCAT_METRIC_SPACE_HPP
#define WARPSCAT_METRIC_SPACE_HPP

// Pointwise and integrated distances between Riemannian metrics on the same
// underlying manifold.  The pointwise distortion A between two metrics
// (given as Gram matrices on the cotangent spaces) solves
// g2(xi, zeta) = g1(A xi, zeta); with eigenvalues alpha_k the invariants are
//
//   d      = max_k |ln alpha_k|
//   dtilde = 2 sinh(n d / 4)
//   rho    = (prod_k alpha_k)^{-1/2}   (volume density of g2 w.r.t. g1)
//
// Radial fields over a warp profile reduce to closed-form diagonal
// distortions; the integrated distance weighs dtilde by r0^{-(n+2)} and the
// symmetrizing factor (1 + rho) against the volume of the first argument.

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "warpscat/profile.hpp"
#include "warpscat/warped_geometry.hpp"

namespace warpscat {

struct PointwiseDistortion {
    std::vector<double> alpha;  // distortion eigenvalues, ascending
    double d = 0.0;
    double dtilde = 0.0;
    double rho = 1.0;
};

inline double dtilde_from_d(double d, int n) { return 2.0 * std::sinh(n * d / 4.0); }

// Weak triangle bound: dtilde(1,3) <= mu(dtilde(1,2), dtilde(2,3)).
inline double weak_triangle_mu(double a, double b) {
    return a * std::sqrt(0.25 * b * b + 1.0) + b * std::sqrt(0.25 * a * a + 1.0);
}

// Coarser variant, mu(a, b) <= a + b + a b.
inline double weak_triangle_mu_coarse(double a, double b) { return a + b + a * b; }

// Distortion of g2 relative to g1, both SPD Gram matrices of the same size.
// Eigenvalues come from the Cholesky-whitened pencil L^{-1} G2 L^{-T}.
inline PointwiseDistortion relative_distortion(const Eigen::MatrixXd& g1,
                                               const Eigen::MatrixXd& g2) {
    if (g1.rows() != g1.cols() || g2.rows() != g2.cols() || g1.rows() != g2.rows())
        throw std::invalid_argument("relative_distortion: size mismatch");
    const auto n = g1.rows();
    const Eigen::LLT<Eigen::MatrixXd> llt(g1);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("relative_distortion: first matrix not SPD");
    const Eigen::MatrixXd l = llt.matrixL();
    const Eigen::MatrixXd white =
        l.triangularView<Eigen::Lower>().solve(g2).transpose();
    const Eigen::MatrixXd sym = l.triangularView<Eigen::Lower>().solve(white);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(
        0.5 * (sym + sym.transpose()));
    if (eig.info() != Eigen::Success)
        throw std::runtime_error("relative_distortion: eigensolver failed");

    PointwiseDistortion out;
    out.alpha.resize(static_cast<std::size_t>(n));
    double log_det = 0.0, dmax = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double a = eig.eigenvalues()[i];
        if (!(a > 0.0)) throw std::invalid_argument("relative_distortion: second matrix not SPD");
        out.alpha[static_cast<std::size_t>(i)] = a;
        log_det += std::log(a);
        dmax = std::max(dmax, std::abs(std::log(a)));
    }
    out.d = dmax;
    out.dtilde = dtilde_from_d(dmax, static_cast<int>(n));
    out.rho = std::exp(-0.5 * log_det);
    return out;
}

inline double pointwise_d(const Eigen::MatrixXd& g1, const Eigen::MatrixXd& g2) {
    return relative_distortion(g1, g2).d;
}

inline double pointwise_dtilde(const Eigen::MatrixXd& g1, const Eigen::MatrixXd& g2) {
    return relative_distortion(g1, g2).dtilde;
}

inline double density_rho(const Eigen::MatrixXd& g1, const Eigen::MatrixXd& g2) {
    return relative_distortion(g1, g2).rho;
}

// Radial scale factor mu(s) with derivatives (derivatives may be empty for
// distance-only use; reparametrization requires them).
struct RadialFn {
    std::function<double(double)> value;
    std::function<double(double)> deriv;
    std::function<double(double)> deriv2;
};

inline RadialFn zero_radial_fn() {
    return {[](double) { return 0.0; }, [](double) { return 0.0; }, [](double) { return 0.0; }};
}

// A rotationally symmetric metric over the two-ended axis: a warp profile
// with an optional radial conformal factor e^{2 mu(s)}.
class MetricField {
public:
    enum class Kind { warped, conformal, warped_conformal };

    static MetricField warped(Profile profile) {
        MetricField f;
        f.kind_ = Kind::warped;
        f.profile_ = std::move(profile);
        f.mu_ = zero_radial_fn();
        return f;
    }

    static MetricField conformal(Profile base, RadialFn mu) {
        MetricField f;
        f.kind_ = Kind::conformal;
        f.profile_ = std::move(base);
        f.mu_ = std::move(mu);
        if (!f.mu_.value) throw std::invalid_argument("MetricField: missing conformal factor");
        return f;
    }

    static MetricField warped_conformal(Profile profile, RadialFn mu) {
        MetricField f = conformal(std::move(profile), std::move(mu));
        f.kind_ = Kind::warped_conformal;
        return f;
    }

    Kind kind() const { return kind_; }
    int dim() const { return profile_.dim(); }
    const Profile& profile() const { return profile_; }
    const RadialFn& mu() const { return mu_; }

    double mu_value(double s) const { return kind_ == Kind::warped ? 0.0 : mu_.value(s); }
    double warp(double s) const { return profile_.evaluate(s).r; }

    // volume density against ds * (unit fiber volume): e^{n mu} r^{n-1}
    double volume_density(double s) const {
        return std::exp(dim() * mu_value(s)) * std::pow(warp(s), dim() - 1);
    }

private:
    Kind kind_ = Kind::warped;
    Profile profile_;
    RadialFn mu_;
};

// Closed-form distortion between two radial fields at axis position s.  The
// cotangent Gram matrices in the coordinate coframe are
// diag(e^{-2mu}, e^{-2mu} r^{-2} I) so the distortion is diagonal.
inline PointwiseDistortion radial_distortion(const MetricField& a, const MetricField& b,
                                             double s) {
    if (a.dim() != b.dim()) throw std::invalid_argument("radial_distortion: dimension mismatch");
    const int n = a.dim();
    const double gap = 2.0 * (a.mu_value(s) - b.mu_value(s));
    const double axis = std::exp(gap);
    const double ratio = a.warp(s) / b.warp(s);
    const double fiber = axis * ratio * ratio;

    PointwiseDistortion out;
    out.alpha.assign(static_cast<std::size_t>(n), fiber);
    out.alpha[0] = axis;
    std::sort(out.alpha.begin(), out.alpha.end());
    out.d = std::max(std::abs(std::log(axis)), std::abs(std::log(fiber)));
    out.dtilde = dtilde_from_d(out.d, n);
    out.rho = std::exp(-0.5 * (std::log(axis) + (n - 1) * std::log(fiber)));
    return out;
}

struct DistanceReport {
    double dtilde_inf = 0.0;
    double worst_s = 0.0;       // where the pointwise dtilde peaks
    double dtilde_1 = 0.0;      // +inf when the weighted integral diverges
    double quadrature_error = 0.0;
    bool finite = true;
    bool estimate = false;      // truncated tail or sampled-measure path
    double tail_exponent = 0.0; // fitted integrand exponent beyond the grid
};

// sup of the pointwise dtilde over grid nodes in [lo, hi].
inline std::pair<double, double> dtilde_inf(const MetricField& a, const MetricField& b,
                                            double lo, double hi) {
    const auto& grid = a.profile().grid();
    double best = 0.0, where = lo;
    for (double s : grid) {
        if (s < lo || s > hi) continue;
        if (!b.profile().in_range(s)) continue;
        const double v = radial_distortion(a, b, s).dtilde;
        if (v > best) {
            best = v;
            where = s;
        }
    }
    return {best, where};
}

inline double sphere_volume(int n) {
    // volume of the unit (n-1)-sphere
    return 2.0 * std::pow(M_PI, 0.5 * n) / std::tgamma(0.5 * n);
}

struct DistanceOptions {
    double rel_tol = 1e-9;       // adaptive quadrature target
    double edge_threshold = 1e-13;  // pointwise dtilde at the grid edge treated as zero
    double tail_probe = 8.0;     // probe tail integrand up to probe * L
    int initial_panels = 256;    // fixed pre-split so narrow bumps cannot be missed
};

// Weighted L1 distance between two radial fields:
//   integral of dtilde(a,b)(s) * r0(s)^{-(n+2)} * (1 + rho_{b,a}(s)) dvol_a.
// The core integral runs over the r0 grid by adaptive Simpson.  Beyond the
// grid the integrand either vanishes (compactly supported deformations), or
// is probed at geometric points and extrapolated by its fitted power law;
// a fitted exponent >= -1 marks the integral divergent.
inline DistanceReport dtilde_1(const MetricField& a, const MetricField& b,
                               const GeometryBounds& scale, DistanceOptions opts = {}) {
    if (a.dim() != b.dim()) throw std::invalid_argument("dtilde_1: dimension mismatch");
    const int n = a.dim();
    const double omega = sphere_volume(n);
    const detail::CubicSpline r0_interp(scale.s, scale.r0);

    // r0 beyond the sampled range: rebuild it from the base profile's
    // analytic tail (window max scanned directly).
    const auto r0_at = [&](double s) {
        if (s >= scale.s.front() && s <= scale.s.back())
            return std::max(1e-300, r0_interp(s));
        const Profile& p = a.profile();
        double kap = 1.0;
        for (int j = 0; j <= 400; ++j) {
            const double t = s - 2.0 + 4.0 * static_cast<double>(j) / 400.0;
            const ProfilePoint q = p.evaluate(t);
            kap = std::max(kap, detail::kappa_node(q.r, q.rdot, q.rddot, n));
        }
        const double v =
            scale.constants.C0 * std::min(1.0 / std::sqrt(kap), p.evaluate(s).r);
        return std::max(1e-300, std::min(v, 1.0));
    };

    const auto integrand = [&](double s) {
        const PointwiseDistortion pd = radial_distortion(a, b, s);
        return pd.dtilde * std::pow(r0_at(s), -(n + 2)) * (1.0 + pd.rho) * omega *
               a.volume_density(s);
    };

    const double lo = std::max({scale.s.front(), a.profile().s_min(), b.profile().s_min()});
    const double hi = std::min({scale.s.back(), a.profile().s_max(), b.profile().s_max()});

    DistanceReport out;
    const auto [dinf, where] = dtilde_inf(a, b, lo, hi);
    out.dtilde_inf = dinf;
    out.worst_s = where;

    const int panels = std::max(1, opts.initial_panels);
    for (int j = 0; j < panels; ++j) {
        const double pa = lo + (hi - lo) * static_cast<double>(j) / panels;
        const double pb = lo + (hi - lo) * static_cast<double>(j + 1) / panels;
        const auto piece = detail::integrate_adaptive(integrand, pa, pb, opts.rel_tol, 1e-300);
        out.dtilde_1 += piece.value;
        out.quadrature_error += piece.error;
    }

    // tail handling per side
    for (int side = 0; side < 2; ++side) {
        const double edge = side == 0 ? lo : hi;
        const double d_edge = radial_distortion(a, b, edge).dtilde;
        if (d_edge <= opts.edge_threshold) continue;  // deformation died out before the edge

        const bool analytic = a.profile().kind() == ProfileKind::power_law &&
                              b.profile().kind() == ProfileKind::power_law;
        if (!analytic) {
            out.estimate = true;  // nonzero at the boundary, nothing known beyond
            continue;
        }
        std::vector<double> lx, ly;
        bool ok = true;
        for (double f = 1.0; f <= opts.tail_probe + 1e-9; f *= 2.0) {
            const double s = edge * f;
            const double v = integrand(s);
            if (!(v > 0.0)) {
                ok = false;
                break;
            }
            lx.push_back(std::log(std::abs(s)));
            ly.push_back(std::log(v));
        }
        if (!ok) continue;  // tail vanished
        const auto fit = detail::fit_line(lx, ly);
        out.tail_exponent = fit.slope;
        if (fit.slope >= -1.05) {
            out.finite = false;
            out.dtilde_1 = std::numeric_limits<double>::infinity();
            return out;
        }
        // power-law tail: integral_edge^inf C s^p ds = I(edge) |edge| / (-p - 1)
        const double tail = integrand(edge) * std::abs(edge) / (-fit.slope - 1.0);
        out.dtilde_1 += tail;
        out.quadrature_error += 0.1 * tail;  // extrapolation, order-of-magnitude error
    }
    return out;
}

// Sampled-measure variant for general (non-radial) pointwise data: points
// carry their own g1-volume weights.  Always flagged as an estimate.
inline DistanceReport dtilde_1_sampled(const std::vector<Eigen::MatrixXd>& g1,
                                       const std::vector<Eigen::MatrixXd>& g2,
                                       const std::vector<double>& r0,
                                       const std::vector<double>& weights) {
    if (g1.size() != g2.size() || g1.size() != r0.size() || g1.size() != weights.size() ||
        g1.empty())
        throw std::invalid_argument("dtilde_1_sampled: size mismatch");
    DistanceReport out;
    out.estimate = true;
    for (std::size_t i = 0; i < g1.size(); ++i) {
        const PointwiseDistortion pd = relative_distortion(g1[i], g2[i]);
        const int n = static_cast<int>(pd.alpha.size());
        out.dtilde_1 += weights[i] * pd.dtilde * std::pow(r0[i], -(n + 2)) * (1.0 + pd.rho);
        if (pd.dtilde > out.dtilde_inf) {
            out.dtilde_inf = pd.dtilde;
            out.worst_s = static_cast<double>(i);
        }
    }
    return out;
}

// Reparametrization of a radial conformal metric e^{2 mu}(ds^2 + r^2 g)
// into pure warped form dt^2 + w(t)^2 g: t integrates e^{mu} ds and the new
// warp is e^{mu} r read along t.  Returns the new profile on the t-grid and
// the monotone coordinate maps.
struct ReparametrizedWarp {
    Profile profile;                 // warp as a function of t
    detail::CubicSpline t_of_s;
    detail::CubicSpline s_of_t;
};

inline ReparametrizedWarp reparametrize_conformal(const Profile& base, const RadialFn& mu) {
    if (!mu.value || !mu.deriv || !mu.deriv2)
        throw std::invalid_argument("reparametrize_conformal: mu needs two derivatives");
    const auto& s = base.grid();
    std::vector<double> t(s.size());
    t[0] = 0.0;
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
        const double h = s[i + 1] - s[i];
        const double f0 = std::exp(mu.value(s[i]));
        const double fm = std::exp(mu.value(0.5 * (s[i] + s[i + 1])));
        const double f1 = std::exp(mu.value(s[i + 1]));
        t[i + 1] = t[i] + h / 6.0 * (f0 + 4.0 * fm + f1);
    }
    // anchor t = 0 at s = 0 when the grid brackets the origin
    if (s.front() < 0.0 && s.back() > 0.0) {
        const detail::CubicSpline raw(s, t);
        const double shift = raw(0.0);
        for (double& v : t) v -= shift;
    }

    std::vector<double> w(s.size()), wd(s.size()), wdd(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        const ProfilePoint q = base.evaluate(s[i]);
        const double m = mu.value(s[i]), m1 = mu.deriv(s[i]), m2 = mu.deriv2(s[i]);
        const double em = std::exp(m);
        w[i] = em * q.r;
        wd[i] = m1 * q.r + q.rdot;                                  // e^{-mu} d/ds (e^{mu} r)
        wdd[i] = std::exp(-m) * (m2 * q.r + m1 * q.rdot + q.rddot); // same, one more d/dt
    }
    ReparametrizedWarp out{
        Profile::sampled(base.dim(), t, std::move(w), std::move(wd), std::move(wdd),
                         ProfileKind::conformal_reparam),
        detail::CubicSpline(s, t), detail::CubicSpline(t, s)};
    return out;
}

struct AdmissibilityOptions {
    double gamma = 1.0;        // sup-distance budget
    double eps = 1.0;          // integrated-distance budget
    double inj_slack = 0.5;    // homogenized radius must exceed inj_slack * r0
    double ric_slack = 0.0;    // Ricci floor is -ric_slack / r0^2; 0 means dim - 1
    std::size_t stride = 5;    // grid stride for the pointwise bound checks
    DistanceOptions distance;
};

struct AdmissibilityReport {
    bool admissible = false;
    bool inf_ok = false;
    bool l1_ok = false;
    bool bounds_ok = false;
    DistanceReport distance;
    double worst_inj_margin = std::numeric_limits<double>::infinity();  // min iota - slack*r0
    double worst_ric_margin = std::numeric_limits<double>::infinity();  // min ric + slack/r0^2
    AdmissibilityOptions options;
};

// Membership test for the admissible neighborhood of the base field: the
// sup-distance stays below gamma, the weighted L1 distance below eps, and
// the candidate keeps curvature/injectivity lower bounds at the base scale
// r0 (up to the printed slack constants; the proven bounds fix the shape of
// these checks but not their absolute constants).
inline AdmissibilityReport admissibility(const MetricField& base, const MetricField& g,
                                         const GeometryBounds& scale,
                                         AdmissibilityOptions opts = {}) {
    AdmissibilityReport rep;
    if (opts.ric_slack <= 0.0) opts.ric_slack = static_cast<double>(g.dim() - 1);
    rep.options = opts;

    rep.distance = dtilde_1(base, g, scale, opts.distance);
    rep.inf_ok = rep.distance.dtilde_inf <= opts.gamma;
    rep.l1_ok = rep.distance.finite && rep.distance.dtilde_1 <= opts.eps;

    // geometry of the candidate in its own arc-length coordinate
    const bool is_conformal = g.kind() != MetricField::Kind::warped;
    Profile gp = g.profile();
    std::optional<detail::CubicSpline> t_of_s;
    if (is_conformal) {
        ReparametrizedWarp rw = reparametrize_conformal(g.profile(), g.mu());
        t_of_s.emplace(std::move(rw.t_of_s));
        gp = std::move(rw.profile);
    }
    const GeometryBounds gb = r0_function(gp, scale.constants);
    std::vector<double> ric(gp.grid().size());
    for (std::size_t i = 0; i < ric.size(); ++i)
        ric[i] = curvature(gp, gp.grid()[i]).ric_minus;

    rep.bounds_ok = true;
    std::size_t checked = 0;
    const auto& s0 = scale.s;
    for (std::size_t i = 0; i < s0.size(); i += opts.stride) {
        const double r0 = scale.r0[i];
        const double x = t_of_s ? (*t_of_s)(s0[i]) : s0[i];
        // skip nodes whose r0-ball is clipped by the sampled window: the
        // checks there would measure the truncation, not the geometry
        if (x - r0 < gp.s_min() || x + r0 > gp.s_max()) continue;
        ++checked;

        const double radius = iota(gb.s, gb.inj_lb, x);
        const double inj_margin = radius - opts.inj_slack * r0;
        rep.worst_inj_margin = std::min(rep.worst_inj_margin, inj_margin);
        if (inj_margin < -1e-9) rep.bounds_ok = false;

        const double bar = opts.ric_slack / (r0 * r0);
        const double ric_margin = homogenized_inf(gb.s, ric, x, r0) + bar;
        rep.worst_ric_margin = std::min(rep.worst_ric_margin, ric_margin);
        if (ric_margin < -1e-9 * (std::abs(ric_margin - bar) + bar)) rep.bounds_ok = false;
    }
    if (checked == 0) rep.bounds_ok = false;  // window too small to certify anything

    rep.admissible = rep.inf_ok && rep.l1_ok && rep.bounds_ok;
    return rep;
}

}  // namespace warpscat

#endif
