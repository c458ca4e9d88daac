#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include "warpscat/timedomain.hpp"

using warpscat::Channel;
using warpscat::PacketKind;
using warpscat::PacketSpec;
using warpscat::WavePacket;

namespace {

std::vector<double> uniform_grid(double a, double b, std::size_t n) {
    return warpscat::detail::linspace(a, b, n);
}

double l2_norm(const WavePacket& p) {
    const double h = p.grid[1] - p.grid[0];
    double acc = 0.0;
    for (const auto& z : p.psi) acc += std::norm(z);
    return std::sqrt(acc * h);
}

double centroid(const WavePacket& p) {
    const double h = p.grid[1] - p.grid[0];
    double acc = 0.0;
    for (std::size_t i = 0; i < p.grid.size(); ++i) acc += p.grid[i] * std::norm(p.psi[i]) * h;
    return acc;
}

// projection h * sum psi e^{-iks}: proportional to the packet's spectrum
double spectral_weight(const WavePacket& p, double k) {
    const double h = p.grid[1] - p.grid[0];
    std::complex<double> acc = 0.0;
    for (std::size_t i = 0; i < p.grid.size(); ++i)
        acc += p.psi[i] * std::polar(1.0, -k * p.grid[i]);
    return std::abs(acc) * h;
}

}  // namespace

TEST_CASE("packet construction invariants", "[timedomain]") {
    const auto grid = uniform_grid(-100.0, 100.0, 10001);
    const PacketSpec spec{0.0, 1.0};
    const auto p = warpscat::make_state(PacketKind::plane_mod, 2.0, spec, grid);

    CHECK(std::abs(l2_norm(p) - 1.0) < 1e-12);

    // spectrum peaks at v and is empty outside |k - v| < width
    const double peak = spectral_weight(p, 2.0);
    CHECK(peak > spectral_weight(p, 2.6));
    CHECK(spectral_weight(p, 3.4) < 1e-5 * peak);
    CHECK(spectral_weight(p, 0.6) < 1e-5 * peak);

    // grid synthesis agrees with the quadrature evaluation up to one overall
    // normalization constant
    const double ref = std::abs(warpscat::free_amplitude(2.0, spec, 0.0, 0.0));
    const double at0 = std::abs(p.psi[5000]);
    for (double x : {3.0, 7.0}) {
        const auto idx = static_cast<std::size_t>(std::llround((x + 100.0) / 0.02));
        const double got = std::abs(p.psi[idx]);
        const double want = std::abs(warpscat::free_amplitude(2.0, spec, x, 0.0)) / ref * at0;
        CHECK(std::abs(got - want) < 1e-8 * at0);
    }
}

TEST_CASE("odd packets vanish at the origin", "[timedomain]") {
    const auto grid = uniform_grid(-80.0, 80.0, 8001);
    const auto p = warpscat::make_state(PacketKind::odd_dirichlet, 3.0, {-25.0, 1.0}, grid);
    CHECK(std::abs(l2_norm(p) - 1.0) < 1e-12);
    CHECK(std::abs(p.psi[4000]) < 1e-12);  // node at s = 0

    // odd part of a symmetric zero-velocity state cancels identically
    const auto zero = warpscat::make_state(PacketKind::odd_dirichlet, 0.0, {0.0, 1.0}, grid);
    double peak = 0.0;
    for (const auto& z : zero.psi) peak = std::max(peak, std::abs(z));
    CHECK(peak < 1e-10);
}

TEST_CASE("construction and stepping refuse bad resolutions", "[timedomain]") {
    const auto coarse = uniform_grid(-10.0, 10.0, 41);  // h = 0.5
    CHECK_THROWS_AS(warpscat::make_state(PacketKind::plane_mod, 6.0, {0.0, 1.0}, coarse),
                    std::invalid_argument);

    const auto grid = uniform_grid(-20.0, 20.0, 2001);
    const std::vector<double> quiet(grid.size(), 0.0);
    const auto p = warpscat::make_state(PacketKind::plane_mod, 2.0, {0.0, 1.0}, grid);
    // band edge k = 3: dt k^2 must stay below 1
    CHECK_THROWS_AS(warpscat::evolve(quiet, p, 1.0, 0.5), std::invalid_argument);

    const std::vector<double> loud(grid.size(), 2.0);
    const auto slow = warpscat::make_state(PacketKind::plane_mod, 0.2, {0.0, 0.3}, grid);
    CHECK_THROWS_AS(warpscat::evolve(loud, slow, 1.0, 0.3), std::invalid_argument);

    // the wall option needs an actual node at s = 0
    const auto offset = uniform_grid(0.01, 40.01, 2001);
    const auto q = warpscat::make_state(PacketKind::plane_mod, 2.0, {20.0, 1.0}, offset);
    warpscat::EvolveOptions wall;
    wall.dirichlet_wall = true;
    CHECK_THROWS_AS(warpscat::evolve(std::vector<double>(offset.size(), 0.0), q, 1.0, 0.01, wall),
                    std::invalid_argument);
}

TEST_CASE("free transport moves the centroid at the group velocity", "[timedomain]") {
    const auto grid = uniform_grid(-100.0, 140.0, 12001);
    const std::vector<double> free_w(grid.size(), 0.0);
    const double v = 2.0, T = 10.0;
    const auto p0 = warpscat::make_state(PacketKind::plane_mod, v, {-40.0, 1.0}, grid);
    CHECK(std::abs(centroid(p0) + 40.0) < 1e-5);

    const auto p1 = warpscat::evolve(free_w, p0, T, 0.005);
    CHECK(p1.time == Catch::Approx(T));
    CHECK(std::abs(centroid(p1) - (-40.0 + 2.0 * v * T)) < 1e-3 * (2.0 * v * T));
    CHECK(p1.norm_drift < 1e-8);
    CHECK(std::abs(l2_norm(p1) - 1.0) < 1e-8);

    const auto rep = warpscat::asymptotic_masses(p1, 20.0);
    CHECK(std::abs(rep.mass_left + rep.mass_center + rep.mass_right - 1.0) < 1e-8);
    CHECK(rep.t_final == Catch::Approx(T));
}

TEST_CASE("dirichlet wall reproduces odd-sector dynamics", "[timedomain]") {
    const auto grid = uniform_grid(-80.0, 80.0, 8001);
    std::vector<double> w(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) w[i] = 0.3 * std::exp(-grid[i] * grid[i]);

    const auto p0 = warpscat::make_state(PacketKind::odd_dirichlet, 3.0, {-25.0, 1.0}, grid);
    const auto full = warpscat::evolve(w, p0, 5.0, 0.005);
    warpscat::EvolveOptions opt;
    opt.dirichlet_wall = true;
    const auto walled = warpscat::evolve(w, p0, 5.0, 0.005, opt);

    double diff = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i)
        diff = std::max(diff, std::abs(full.psi[i] - walled.psi[i]));
    CHECK(diff < 1e-8);
    CHECK(std::abs(walled.psi[4000]) == 0.0);
}

TEST_CASE("transmitted mass matches the stationary prediction", "[timedomain]") {
    // smooth bump potential, solved independently in the stationary picture
    const double v0 = 1.0;
    Channel c;
    c.w_eff = [v0](double s) { return v0 * std::exp(-s * s); };
    c.tail_left.analytic = true;  // decays beyond every power
    c.tail_right.analytic = true;

    const double v = 1.2, width = 0.4;
    warpscat::SolveOptions sopt;
    sopt.domain_L = 12.0;

    warpscat::ScatteringData data;
    data.k_grid = uniform_grid(0.7, 1.7, 51);
    for (double k : data.k_grid) {
        const auto pt = warpscat::solve_stationary(c, k, sopt);
        data.t.push_back(pt.t);
        data.max_defect = std::max(data.max_defect, pt.defect);
    }
    REQUIRE(data.max_defect < 1e-6);
    const auto verdict = warpscat::openness(data, v, {width});

    // time-domain crossing of the same bump
    const auto grid = uniform_grid(-120.0, 120.0, 12001);
    std::vector<double> w(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) w[i] = c.w_eff(grid[i]);
    const auto p0 = warpscat::make_state(PacketKind::plane_mod, v, {-15.0, width}, grid);
    const auto p1 = warpscat::evolve(w, p0, 25.0, 0.005);
    const auto rep = warpscat::asymptotic_masses(p1, 10.0);

    CHECK(rep.settled);
    CHECK(rep.norm_drift < 1e-8);
    CHECK(std::abs(rep.mass_right - verdict.indicator) < 2e-2);
    CHECK(std::abs(rep.mass_left - (1.0 - verdict.indicator)) < 2e-2);
}

TEST_CASE("off-cone amplitudes decay to high order", "[timedomain]") {
    const PacketSpec spec{0.0, 0.5};  // spectrum [1, 2] around v = 1.5
    const double v = 1.5;

    const auto rep = warpscat::stationary_phase_check(v, spec, {10.0, 20.0, 40.0}, 0.5, 2.5);
    CHECK(rep.conclusive);
    CHECK(rep.order >= 3.0);
    CHECK(rep.pass);

    // along the packet ray there is no such decay: dispersion alone, order
    // well under one
    const double a10 = std::abs(warpscat::free_amplitude(v, spec, 2.0 * v * 10.0, 10.0));
    const double a40 = std::abs(warpscat::free_amplitude(v, spec, 2.0 * v * 40.0, 40.0));
    const double ray_order =
        std::log(a10 / a40) / std::log((1.0 + 2.0 * v * 40.0 + 40.0) / (1.0 + 2.0 * v * 10.0 + 10.0));
    CHECK(ray_order < 1.0);

    // doubling t deep off the cone cuts the amplitude by 2^3 or better once
    // past the pre-asymptotic regime
    const double q = 3.5;
    const double d20 = std::abs(warpscat::free_amplitude(v, spec, 2.0 * q * 20.0, 20.0));
    const double d40 = std::abs(warpscat::free_amplitude(v, spec, 2.0 * q * 40.0, 40.0));
    CHECK(d40 < d20 / 8.0);

    CHECK_THROWS_AS(warpscat::stationary_phase_check(v, spec, {10.0}, 1.2, 2.5),
                    std::invalid_argument);
}
