#pragma once

// Perturbation families around a warped base metric, the admissibility gate
// per family member, and the empirical continuity/persistence pipeline:
// per-channel S-data deviations and openness indicators along the family,
// with the largest verified perturbation size reported as eps0.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <future>
#include <limits>
#include <memory>
#include <stdexcept>
#include <vector>

#include "warpscat/channels.hpp"
#include "warpscat/detail/numerics.hpp"
#include "warpscat/metric_space.hpp"
#include "warpscat/scatter1d.hpp"
#include "warpscat/warped_geometry.hpp"

namespace warpscat {

enum class DeformKind { warp, conformal };

// One-parameter deformation of a warped base: either the warp is rescaled,
// r_eps = r (1 + eps shape), or a radial conformal factor e^{2 eps shape}
// multiplies the whole metric. The shape must be compactly supported inside
// the profile window so the ends stay exactly power-law.
struct PerturbationFamily {
    MetricField base;
    DeformKind kind = DeformKind::warp;
    RadialFn shape;
    std::vector<double> eps_grid;  // strictly decreasing, positive

    MetricField at(double eps) const {
        if (eps == 0.0) return base;
        if (eps < 0.0) throw std::invalid_argument("family is defined for eps >= 0");
        if (kind == DeformKind::conformal) {
            const RadialFn& f = shape;
            RadialFn mu{[f, eps](double s) { return eps * f.value(s); },
                        [f, eps](double s) { return eps * f.deriv(s); },
                        [f, eps](double s) { return eps * f.deriv2(s); }};
            return MetricField::conformal(base.profile(), std::move(mu));
        }
        const auto bp = std::make_shared<const Profile>(base.profile());
        const RadialFn f = shape;
        const auto eval = [bp, f, eps](double s) {
            const ProfilePoint q = bp->evaluate(s);
            const double g = eps * f.value(s), g1 = eps * f.deriv(s), g2 = eps * f.deriv2(s);
            ProfilePoint out;
            out.r = q.r * (1.0 + g);
            out.rdot = q.rdot * (1.0 + g) + q.r * g1;
            out.rddot = q.rddot * (1.0 + g) + 2.0 * q.rdot * g1 + q.r * g2;
            return out;
        };
        return MetricField::warped(Profile::power_law_interior(*bp, eval));
    }
};

inline RadialFn bump_shape(detail::SmoothBump b) {
    return {[b](double s) { return b.value(s); }, [b](double s) { return b.deriv(s); },
            [b](double s) { return b.deriv2(s); }};
}

inline PerturbationFamily make_family(MetricField base, DeformKind kind, RadialFn shape,
                                      std::vector<double> eps_grid) {
    if (base.kind() != MetricField::Kind::warped)
        throw std::invalid_argument("family base must be a warped field");
    if (kind == DeformKind::warp && base.profile().kind() != ProfileKind::power_law)
        throw std::invalid_argument("warp deformations need a power-law base profile");
    if (!shape.value || !shape.deriv || !shape.deriv2)
        throw std::invalid_argument("deformation shape needs two derivatives");
    if (eps_grid.empty()) throw std::invalid_argument("empty eps grid");
    for (std::size_t i = 0; i < eps_grid.size(); ++i) {
        if (!(eps_grid[i] > 0.0)) throw std::invalid_argument("eps values must be positive");
        if (i > 0 && !(eps_grid[i] < eps_grid[i - 1]))
            throw std::invalid_argument("eps grid must be strictly decreasing");
    }
    // compact support: the deformation must not touch the window ends, or
    // the power-law continuation beyond them lies
    const Profile& p = base.profile();
    for (double s : {p.s_min(), p.s_min() + 1.0, p.s_max() - 1.0, p.s_max()})
        if (shape.value(s) != 0.0)
            throw std::invalid_argument("deformation shape must vanish near the window ends");
    return {std::move(base), kind, std::move(shape), std::move(eps_grid)};
}

struct BudgetRow {
    double eps = 0.0;
    AdmissibilityReport gate;
};

// Admissibility of every family member against the base, ordered along
// eps_grid with a trailing exact eps = 0 row.
inline std::vector<BudgetRow> budget(const PerturbationFamily& fam, const GeometryBounds& scale,
                                     const AdmissibilityOptions& opts = {}) {
    std::vector<double> eps = fam.eps_grid;
    eps.push_back(0.0);
    std::vector<std::future<AdmissibilityReport>> jobs;
    jobs.reserve(eps.size());
    for (double e : eps)
        jobs.push_back(std::async(std::launch::async, [&fam, &scale, &opts, e] {
            return admissibility(fam.base, fam.at(e), scale, opts);
        }));
    std::vector<BudgetRow> rows(eps.size());
    for (std::size_t i = 0; i < eps.size(); ++i) rows[i] = {eps[i], jobs[i].get()};
    return rows;
}

// True when the sup and integrated distances shrink along the (decreasing)
// eps rows, as scaling a fixed bump must make them.
inline bool family_monotone(const std::vector<BudgetRow>& rows) {
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& a = rows[i - 1].gate.distance;
        const auto& b = rows[i].gate.distance;
        if (b.dtilde_inf > a.dtilde_inf * (1.0 + 1e-9) + 1e-15) return false;
        const bool both_finite = a.finite && b.finite;
        if (both_finite && b.dtilde_1 > a.dtilde_1 * (1.0 + 1e-9) + 1e-15) return false;
        if (!a.finite && b.finite) continue;  // shrinking eps may regain integrability
        if (a.finite && !b.finite) return false;
    }
    return true;
}

struct ChannelTrace {
    int m = 0;
    bool computable = false;    // S-data solvable at eps = 0
    bool open_at_base = false;
    double indicator_base = 0.0;
    // aligned with the report rows; NaN where the gate blocked the solve
    std::vector<double> deviation;  // max_k |t_eps(k) - t_0(k)|
    std::vector<double> indicator;
    bool persists = false;  // open at every admissible eps <= eps0
};

struct StabilityOptions {
    AdmissibilityOptions gate;
    SolveOptions solver;  // shared by every run, the eps = 0 baseline included
    SpectralEnvelope envelope;
    double velocity = 1.0;      // test-state center for the openness indicator
    double open_threshold = 0.5;
    double noise = 1e-4;        // monotonicity slack on the deviation column
};

struct StabilityReport {
    std::vector<BudgetRow> rows;  // eps descending, trailing eps = 0
    std::vector<ChannelTrace> channels;
    double eps0 = 0.0;      // largest eps with every row at or below it verified
    bool monotone_family = false;
    bool trend_ok = false;  // deviations shrink to 0 and open channels persist
    double noise = 1e-4;
};

namespace detail {

// Tail model rewritten after the argument shifts by delta: each coef * x^p
// becomes coef * (x + delta)^p, expanded to second order in delta. Valid
// because tails are only evaluated far out, where delta / x is tiny.
inline TailModel shift_tail(const TailModel& tail, double delta) {
    if (!tail.analytic || tail.empty() || delta == 0.0) return tail;
    TailModel out;
    out.analytic = true;
    for (const auto& t : tail.terms) {
        if (t.coef == 0.0) continue;
        out.terms.push_back(t);
        out.terms.push_back({t.coef * t.power * delta, t.power - 1.0});
        out.terms.push_back({t.coef * t.power * (t.power - 1.0) * 0.5 * delta * delta,
                             t.power - 2.0});
    }
    return out;
}

struct SeparableProblem {
    Profile profile;
    Channel channel;
    SolveOptions solver;
};

// 1D data of one family member: warp members keep their coordinate, radial
// conformal members are rewritten to warped form first. Tail models and
// breakpoints follow the coordinate change.
inline SeparableProblem separable_problem(const PerturbationFamily& fam, double eps, int m,
                                          const SolveOptions& solver) {
    const MetricField field = fam.at(eps);
    if (field.kind() == MetricField::Kind::warped) {
        Profile p = field.profile();
        Channel c = make_channel(p, m);
        return {std::move(p), std::move(c), solver};
    }
    ReparametrizedWarp rw = reparametrize_conformal(field.profile(), field.mu());
    Channel c = make_channel(rw.profile, m);
    // beyond the deformation's support t = s + const, so the base tails hold
    // in the new coordinate up to that shift
    const Channel c0 = make_channel(fam.base.profile(), m);
    const double shift_r = rw.t_of_s(field.profile().s_max()) - field.profile().s_max();
    const double shift_l = rw.t_of_s(field.profile().s_min()) - field.profile().s_min();
    c.tail_right = shift_tail(c0.tail_right, -shift_r);
    c.tail_left = shift_tail(c0.tail_left, shift_l);
    SolveOptions mapped = solver;
    mapped.breakpoints.clear();
    for (double b : solver.breakpoints) mapped.breakpoints.push_back(rw.t_of_s(b));
    // the new coordinate window is the old one shifted by the c's; the sweep
    // must not step outside the sampled range
    mapped.domain_L =
        std::min({solver.domain_L, rw.profile.s_max(), -rw.profile.s_min()});
    return {std::move(rw.profile), std::move(c), std::move(mapped)};
}

}  // namespace detail

// Continuity and persistence of the per-channel S-data along the family:
// every admissible member is solved with identical solver settings, the
// deviation column max_k |t_eps - t_0| is checked for monotone decay to 0,
// and eps0 is the largest grid eps such that every member at or below it is
// admissible with all base-open channels still open. The verdict is an
// empirical witness on this grid, not a certified constant.
inline StabilityReport s_matrix_continuity(const PerturbationFamily& fam,
                                           const std::vector<int>& channel_list,
                                           const std::vector<double>& k_grid,
                                           const GeometryBounds& scale,
                                           const StabilityOptions& opts = {}) {
    if (channel_list.empty()) throw std::invalid_argument("empty channel list");
    if (k_grid.size() < 4) throw std::invalid_argument("k grid too small");

    StabilityReport rep;
    rep.noise = opts.noise;
    rep.rows = budget(fam, scale, opts.gate);
    rep.monotone_family = family_monotone(rep.rows);
    const std::size_t nrows = rep.rows.size();
    const double nan = std::numeric_limits<double>::quiet_NaN();

    // eps = 0 baseline; channels that refuse to solve are excluded from the
    // persistence verdict (nothing to persist)
    std::vector<ScatteringData> base_data(channel_list.size());
    for (std::size_t ci = 0; ci < channel_list.size(); ++ci) {
        ChannelTrace trace;
        trace.m = channel_list[ci];
        trace.deviation.assign(nrows, nan);
        trace.indicator.assign(nrows, nan);
        try {
            const auto prob = detail::separable_problem(fam, 0.0, trace.m, opts.solver);
            base_data[ci] = s_matrix(prob.channel, prob.profile, k_grid, prob.solver);
            const auto verdict =
                openness(base_data[ci], opts.velocity, opts.envelope, opts.open_threshold);
            trace.computable = true;
            trace.open_at_base = verdict.open;
            trace.indicator_base = verdict.indicator;
        } catch (const std::domain_error&) {
            trace.computable = false;
        }
        rep.channels.push_back(std::move(trace));
    }

    // per-eps solves, gated: no S-data is computed for inadmissible members
    struct RowData {
        std::vector<double> deviation, indicator;
    };
    std::vector<std::future<RowData>> jobs(nrows);
    for (std::size_t i = 0; i < nrows; ++i) {
        if (!rep.rows[i].gate.admissible) continue;
        const double eps = rep.rows[i].eps;
        jobs[i] = std::async(std::launch::async, [&, eps] {
            RowData out;
            for (std::size_t ci = 0; ci < channel_list.size(); ++ci) {
                if (!rep.channels[ci].computable) {
                    out.deviation.push_back(nan);
                    out.indicator.push_back(nan);
                    continue;
                }
                const auto prob =
                    detail::separable_problem(fam, eps, channel_list[ci], opts.solver);
                const auto data = s_matrix(prob.channel, prob.profile, k_grid, prob.solver);
                double dev = 0.0;
                for (std::size_t k = 0; k < k_grid.size(); ++k)
                    dev = std::max(dev, std::abs(data.t[k] - base_data[ci].t[k]));
                out.deviation.push_back(dev);
                out.indicator.push_back(
                    openness(data, opts.velocity, opts.envelope, opts.open_threshold).indicator);
            }
            return out;
        });
    }
    for (std::size_t i = 0; i < nrows; ++i) {
        if (!jobs[i].valid()) continue;
        const RowData row = jobs[i].get();
        for (std::size_t ci = 0; ci < channel_list.size(); ++ci) {
            rep.channels[ci].deviation[i] = row.deviation[ci];
            rep.channels[ci].indicator[i] = row.indicator[ci];
        }
    }

    // a row is verified when it passed the gate and every base-open channel
    // still reports an open indicator there
    const auto verified = [&](std::size_t i) {
        if (!rep.rows[i].gate.admissible) return false;
        for (const auto& tr : rep.channels)
            if (tr.open_at_base && !(tr.indicator[i] > opts.open_threshold)) return false;
        return true;
    };
    for (std::size_t i = 0; i < nrows; ++i) {  // rows are eps-descending
        bool all_below = true;
        for (std::size_t j = i; j < nrows && all_below; ++j) all_below = verified(j);
        if (all_below) {
            rep.eps0 = rep.rows[i].eps;
            break;
        }
    }

    bool any_admissible_positive = false;
    for (const auto& row : rep.rows)
        if (row.eps > 0.0 && row.gate.admissible) any_admissible_positive = true;

    bool monotone = true;
    for (const auto& tr : rep.channels) {
        if (!tr.computable) continue;
        double prev = nan;
        for (std::size_t i = 0; i < nrows; ++i) {
            const double d = tr.deviation[i];
            if (std::isnan(d)) continue;  // gated out
            if (!std::isnan(prev) && d > prev + opts.noise) monotone = false;
            prev = d;
        }
    }
    bool any_open = false;
    for (const auto& tr : rep.channels) any_open = any_open || tr.open_at_base;
    for (auto& tr : rep.channels) {
        tr.persists = tr.open_at_base && rep.eps0 > 0.0;
        for (std::size_t i = 0; i < nrows && tr.persists; ++i)
            if (rep.rows[i].eps > 0.0 && rep.rows[i].eps <= rep.eps0 &&
                rep.rows[i].gate.admissible)
                tr.persists = tr.indicator[i] > opts.open_threshold;
    }
    rep.trend_ok = any_admissible_positive && monotone && (!any_open || rep.eps0 > 0.0);
    return rep;
}

}  // namespace warpscat
