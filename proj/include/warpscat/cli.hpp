#pragma once

// Subcommand implementations behind the command-line tool. Each command
// reads a RunConfig, writes CSV (and optional SVG) into the output
// directory, and reports through exit codes: 0 ok, 1 numerical failure,
// 2 config or parameter error.

#include <complex>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "warpscat/channels.hpp"
#include "warpscat/config.hpp"
#include "warpscat/io.hpp"
#include "warpscat/metric_space.hpp"
#include "warpscat/scatter1d.hpp"
#include "warpscat/stability.hpp"
#include "warpscat/timedomain.hpp"
#include "warpscat/warped_geometry.hpp"

namespace warpscat::cli {

namespace detail {

inline std::string verdict_str(Verdict v) {
    switch (v) {
        case Verdict::yes: return "yes";
        case Verdict::no: return "no";
        default: return "inconclusive";
    }
}

// file-name fragment for a real parameter: 1.25 -> "1p25"
inline std::string tag(double v) {
    std::string s = io::num(v);
    for (char& c : s)
        if (c == '.') c = 'p';
    return s;
}

inline PerturbationFamily family_from(const RunConfig& cfg, const Profile& p) {
    return make_family(MetricField::warped(p), cfg.family_kind,
                       bump_shape({cfg.bump_center, cfg.bump_halfwidth, cfg.bump_amp}),
                       cfg.eps);
}

inline AdmissibilityOptions gate_from(const RunConfig& cfg) {
    AdmissibilityOptions g;
    g.gamma = cfg.gamma;
    g.eps = cfg.eps_budget;
    return g;
}

}  // namespace detail

inline int cmd_profile(const RunConfig& cfg, const std::filesystem::path& out, bool svg) {
    const Profile p = cfg.build_profile();
    const GeometryBounds bounds = r0_function(p, cfg.constants);

    io::Table t;
    t.columns = {"s",        "r",     "rdot",   "rddot", "w",  "sec_radial",
                 "ric_min",  "kappa", "inj_lb", "r0",    "harm_lb"};
    const auto& grid = p.grid();
    for (std::size_t i = 0; i < grid.size(); i += static_cast<std::size_t>(cfg.stride)) {
        const double s = grid[i];
        const ProfilePoint q = p.evaluate(s);
        const CurvatureSample c = curvature(p, s);
        auto& row = t.add_row();
        row = {io::num(s),          io::num(q.r),          io::num(q.rdot),
               io::num(q.rddot),    io::num(base_potential(p, s)),
               io::num(c.sec_radial), io::num(c.ric_minus), io::num(bounds.kappa[i]),
               io::num(bounds.inj_lb[i]), io::num(bounds.r0[i]), io::num(bounds.harm_lb[i])};
    }
    io::write_csv(out / "profile.csv", cfg.header_comment(), t);

    if (svg) {
        io::Series r_of_s{"r(s)", {}, {}};
        io::Series r0_of_s{"r0(s)", {}, {}};
        for (const auto& row : t.rows) {
            r_of_s.x.push_back(std::stod(row[0]));
            r_of_s.y.push_back(std::stod(row[1]));
            r0_of_s.x.push_back(std::stod(row[0]));
            r0_of_s.y.push_back(std::stod(row[9]));
        }
        io::write_svg(out / "profile.svg", "warp and scale", {r_of_s, r0_of_s});
    }
    return 0;
}

inline int cmd_channels(const RunConfig& cfg, const std::filesystem::path& out, bool) {
    const Profile p = cfg.build_profile();

    io::Table t;
    t.columns = {"m",          "lambda",     "multiplicity", "left_alpha",
                 "left_short_range", "left_deift_killip", "left_discrete",
                 "right_alpha", "right_short_range", "right_deift_killip",
                 "right_discrete"};
    for (int m = 0; m <= cfg.m_max; ++m) {
        const Channel c = make_channel(p, m);
        const auto [left, right] = classify(c, p);
        auto& row = t.add_row();
        row = {io::num(m),
               io::num(c.lambda),
               io::num(static_cast<std::int64_t>(c.multiplicity)),
               io::num(left.alpha),
               detail::verdict_str(left.short_range),
               detail::verdict_str(left.deift_killip),
               io::yesno(left.discrete_heuristic),
               io::num(right.alpha),
               detail::verdict_str(right.short_range),
               detail::verdict_str(right.deift_killip),
               io::yesno(right.discrete_heuristic)};
    }
    io::write_csv(out / "channels.csv", cfg.header_comment(), t);
    return 0;
}

inline int cmd_scatter(const RunConfig& cfg, const std::filesystem::path& out, bool svg) {
    const Profile p = cfg.build_profile();
    const std::vector<double> k = cfg.k_grid();

    io::Table t;
    t.columns = {"m",  "k",        "re_t",       "im_t",       "t2",     "re_r_left",
                 "im_r_left",      "r_left2",    "re_r_right", "im_r_right",
                 "r_right2",       "defect",     "near_threshold"};
    io::Table open_t;
    open_t.columns = {"m", "v", "indicator", "open"};
    std::vector<io::Series> curves;

    for (int m = 0; m <= cfg.m_max; ++m) {
        const Channel c = make_channel(p, m);
        ScatteringData data;
        try {
            data = s_matrix(c, p, k);
        } catch (const std::domain_error& e) {
            std::cerr << "scatter: channel m=" << m << " skipped: " << e.what() << "\n";
            continue;
        }
        io::Series curve{"m=" + io::num(m), {}, {}};
        for (std::size_t i = 0; i < k.size(); ++i) {
            const std::complex<double> tc = data.t[i], rl = data.r_left[i],
                                       rr = data.r_right[i];
            auto& row = t.add_row();
            row = {io::num(m),          io::num(k[i]),        io::num(tc.real()),
                   io::num(tc.imag()),  io::num(std::norm(tc)), io::num(rl.real()),
                   io::num(rl.imag()),  io::num(std::norm(rl)), io::num(rr.real()),
                   io::num(rr.imag()),  io::num(std::norm(rr)), io::num(data.defect[i]),
                   io::yesno(std::abs(k[i]) < 1e-3)};
            curve.x.push_back(k[i]);
            curve.y.push_back(std::norm(tc));
        }
        curves.push_back(std::move(curve));

        SpectralEnvelope env{cfg.packet_width};
        for (double v : cfg.velocities) {
            if (k.front() > v - env.width || k.back() < v + env.width) {
                std::cerr << "scatter: v=" << io::num(v)
                          << " spectrum leaves the k grid; indicator skipped\n";
                continue;
            }
            const OpennessVerdict verdict = openness(data, v, env, cfg.threshold);
            auto& row = open_t.add_row();
            row = {io::num(m), io::num(v), io::num(verdict.indicator),
                   io::yesno(verdict.open)};
        }
    }
    io::write_csv(out / "scatter.csv", cfg.header_comment(), t);
    io::write_csv(out / "openness.csv", cfg.header_comment(), open_t);
    if (svg && !curves.empty())
        io::write_svg(out / "scatter.svg", "transmitted flux |t(k)|^2", curves);
    return 0;
}

inline int cmd_propagate(const RunConfig& cfg, const std::filesystem::path& out, bool svg) {
    const Profile p = cfg.build_profile();
    const Channel c = make_channel(p, 0);
    const auto grid = warpscat::detail::linspace(-cfg.box, cfg.box,
                                                 static_cast<std::size_t>(cfg.points));
    std::vector<double> w(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) w[i] = c.w_eff(grid[i]);

    io::Table masses;
    masses.columns = {"v",         "t_final",    "mass_left", "mass_center",
                      "mass_right", "norm_drift", "settled"};
    std::vector<io::Series> finals;

    for (double v : cfg.velocities) {
        PacketSpec spec{cfg.packet_center, cfg.packet_width};
        WavePacket packet = make_state(PacketKind::plane_mod, v, spec, grid);
        const std::vector<std::complex<double>> psi0 = packet.psi;
        packet = evolve(w, packet, cfg.time, cfg.dt);
        const MassReport report = asymptotic_masses(packet, cfg.split);

        io::Table t;
        t.columns = {"s", "abs2_initial", "abs2_final"};
        io::Series curve{"v=" + io::num(v), {}, {}};
        for (std::size_t i = 0; i < grid.size();
             i += static_cast<std::size_t>(cfg.stride)) {
            auto& row = t.add_row();
            row = {io::num(grid[i]), io::num(std::norm(psi0[i])),
                   io::num(std::norm(packet.psi[i]))};
            curve.x.push_back(grid[i]);
            curve.y.push_back(std::norm(packet.psi[i]));
        }
        io::write_csv(out / ("psi_v" + detail::tag(v) + ".csv"), cfg.header_comment(), t);
        finals.push_back(std::move(curve));

        auto& row = masses.add_row();
        row = {io::num(v),
               io::num(report.t_final),
               io::num(report.mass_left),
               io::num(report.mass_center),
               io::num(report.mass_right),
               io::num(report.norm_drift),
               io::yesno(report.settled)};
    }
    io::write_csv(out / "masses.csv", cfg.header_comment(), masses);
    if (svg && !finals.empty())
        io::write_svg(out / "propagate.svg", "|psi(s,T)|^2", finals);
    return 0;
}

inline int cmd_distance(const RunConfig& cfg, const std::filesystem::path& out, bool svg) {
    const Profile p = cfg.build_profile();
    const auto fam = detail::family_from(cfg, p);
    const auto scale = r0_function(p, cfg.constants);
    const auto rows = budget(fam, scale, detail::gate_from(cfg));

    io::Table t;
    t.columns = {"eps",     "dtilde_inf", "worst_s",  "dtilde_1",  "quadrature_error",
                 "finite",  "inf_ok",     "l1_ok",    "bounds_ok", "admissible",
                 "inj_margin", "ric_margin"};
    io::Series curve{"dtilde_1", {}, {}};
    for (const auto& row : rows) {
        const auto& g = row.gate;
        auto& cells = t.add_row();
        cells = {io::num(row.eps),
                 io::num(g.distance.dtilde_inf),
                 io::num(g.distance.worst_s),
                 io::num(g.distance.dtilde_1),
                 io::num(g.distance.quadrature_error),
                 io::yesno(g.distance.finite),
                 io::yesno(g.inf_ok),
                 io::yesno(g.l1_ok),
                 io::yesno(g.bounds_ok),
                 io::yesno(g.admissible),
                 io::num(g.worst_inj_margin),
                 io::num(g.worst_ric_margin)};
        if (g.distance.finite) {
            curve.x.push_back(row.eps);
            curve.y.push_back(g.distance.dtilde_1);
        }
    }
    io::write_csv(out / "distance.csv", cfg.header_comment(), t);
    if (svg) io::write_svg(out / "distance.svg", "integrated distance vs eps", {curve});
    return 0;
}

inline int cmd_stability(const RunConfig& cfg, const std::filesystem::path& out, bool svg) {
    const Profile p = cfg.build_profile();
    const auto fam = detail::family_from(cfg, p);
    const auto scale = r0_function(p, cfg.constants);

    std::vector<int> channel_list;
    for (int m = 0; m <= cfg.m_max; ++m) channel_list.push_back(m);

    StabilityOptions opt;
    opt.gate = detail::gate_from(cfg);
    opt.envelope.width = cfg.packet_width;
    opt.velocity = cfg.velocities.front();
    opt.open_threshold = cfg.threshold;
    const StabilityReport rep =
        s_matrix_continuity(fam, channel_list, cfg.k_grid(), scale, opt);

    io::Table t;
    t.columns = {"eps", "dtilde_inf", "dtilde_1", "admissible"};
    for (int m : channel_list) {
        t.columns.push_back("deviation_m" + io::num(m));
        t.columns.push_back("indicator_m" + io::num(m));
    }
    for (std::size_t i = 0; i < rep.rows.size(); ++i) {
        const auto& row = rep.rows[i];
        auto& cells = t.add_row();
        cells = {io::num(row.eps), io::num(row.gate.distance.dtilde_inf),
                 io::num(row.gate.distance.dtilde_1), io::yesno(row.gate.admissible)};
        for (const auto& tr : rep.channels) {
            cells.push_back(io::num(tr.deviation[i]));
            cells.push_back(io::num(tr.indicator[i]));
        }
    }
    io::write_csv(out / "stability.csv", cfg.header_comment(), t);

    std::ofstream summary(out / "summary.txt", std::ios::binary);
    summary << "stability run\n"
            << "# " << cfg.header_comment() << "\n\n"
            << "family: " << (cfg.family_kind == DeformKind::warp ? "warp" : "conformal")
            << " bump, center " << io::num(cfg.bump_center) << ", halfwidth "
            << io::num(cfg.bump_halfwidth) << ", amp " << io::num(cfg.bump_amp) << "\n"
            << "gate: gamma " << io::num(cfg.gamma) << ", integrated budget "
            << io::num(cfg.eps_budget) << ", scale r0 from C0 " << io::num(cfg.constants.C0)
            << ", c " << io::num(cfg.constants.c) << "\n"
            << "test state: velocity " << io::num(opt.velocity) << ", spectral width "
            << io::num(cfg.packet_width) << ", open threshold " << io::num(cfg.threshold)
            << "\n\n"
            << "verified eps0 = " << io::num(rep.eps0)
            << "  (largest grid eps with every smaller member admissible and all"
               " base-open channels still open)\n"
            << "deviation trend to zero: " << io::yesno(rep.trend_ok)
            << "  (noise floor " << io::num(rep.noise) << ")\n"
            << "distances monotone along the family: " << io::yesno(rep.monotone_family)
            << "\n\nper channel:\n";
    for (const auto& tr : rep.channels) {
        summary << "  m=" << io::num(tr.m);
        if (!tr.computable) {
            summary << "  no scattering data at eps=0; excluded from persistence\n";
            continue;
        }
        summary << "  open at eps=0: " << io::yesno(tr.open_at_base) << " (indicator "
                << io::num(tr.indicator_base) << ")";
        if (tr.open_at_base) summary << ", persists: " << io::yesno(tr.persists);
        summary << "\n";
    }
    summary << "\nThe verdict compares transmission amplitudes on a finite k grid and\n"
               "test-state indicators; it witnesses continuity empirically and does\n"
               "not certify operator-level convergence.\n";
    if (!summary) throw std::runtime_error("write failed for summary.txt");

    if (svg) {
        std::vector<io::Series> curves;
        for (const auto& tr : rep.channels) {
            if (!tr.computable) continue;
            io::Series s{"m=" + io::num(tr.m), {}, {}};
            for (std::size_t i = 0; i < rep.rows.size(); ++i)
                if (std::isfinite(tr.deviation[i])) {
                    s.x.push_back(rep.rows[i].eps);
                    s.y.push_back(tr.deviation[i]);
                }
            curves.push_back(std::move(s));
        }
        if (!curves.empty())
            io::write_svg(out / "stability.svg", "S-data deviation vs eps", curves);
    }
    return 0;
}

// Dispatch with the exit-code contract. The output directory resolves in
// order: --out flag, WARPSCAT_OUT, config [output] dir.
inline int run_command(const std::string& name, const std::string& config_path,
                       const std::string& out_override, bool svg) {
    try {
        const RunConfig cfg = RunConfig::load(config_path);
        std::filesystem::path out = cfg.out_dir;
        if (const char* env = std::getenv("WARPSCAT_OUT"); env && *env) out = env;
        if (!out_override.empty()) out = out_override;
        std::filesystem::create_directories(out);

        if (name == "profile") return cmd_profile(cfg, out, svg);
        if (name == "channels") return cmd_channels(cfg, out, svg);
        if (name == "scatter") return cmd_scatter(cfg, out, svg);
        if (name == "propagate") return cmd_propagate(cfg, out, svg);
        if (name == "distance") return cmd_distance(cfg, out, svg);
        if (name == "stability") return cmd_stability(cfg, out, svg);
        std::cerr << "unknown command '" << name << "'\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error";
        if (e.line) std::cerr << " at line " << e.line << ", column " << e.column;
        std::cerr << ": " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "parameter error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace warpscat::cli
