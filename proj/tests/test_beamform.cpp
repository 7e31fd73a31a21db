// SPDX-License-Identifier: Apache-2.0
//
// Part of irssim, a link-level simulator for reflecting-surface deployment
// studies in multi-user cells.
//
// Tests for phase alignment, the safeguarded block-coordinate ascent, and the
// single/double-reflection power scaling probes.

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "irssim/beamform.hpp"
#include "irssim/rng.hpp"

using namespace irssim;

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

/// Best combined magnitude over a uniform phase grid with `levels` settings
/// per element -- the discrete competitor align_phases has to beat.
double grid_best(const CascadeGains& gains, int levels) {
    const arma::uword n = gains.element_gains.n_elem;
    std::vector<int> idx(n, 0);
    arma::vec theta(n, arma::fill::zeros);
    double best = 0.0;
    while (true) {
        for (arma::uword k = 0; k < n; ++k) theta(k) = kTwoPi * idx[k] / levels;
        best = std::max(best, combined_magnitude(gains, theta));
        arma::uword k = 0;
        while (k < n && ++idx[k] == levels) idx[k++] = 0;
        if (k == n) break;
    }
    return best;
}

arma::uvec all_elements(std::size_t n) { return arma::regspace<arma::uvec>(0, static_cast<arma::uword>(n) - 1); }

}  // namespace

TEST_CASE("align_phases on known instances") {
    // Real positive gains are already aligned.
    CascadeGains real_gains;
    real_gains.element_gains = {std::complex<double>(1.0, 0.0), std::complex<double>(2.0, 0.0)};
    const arma::vec t0 = align_phases(real_gains);
    CHECK(arma::abs(t0).max() == 0.0);
    CHECK(combined_magnitude(real_gains, t0) == doctest::Approx(3.0).epsilon(1e-15));

    // Gains {1, i} with no reference line up to magnitude 2.
    CascadeGains quad;
    quad.element_gains = {std::complex<double>(1.0, 0.0), std::complex<double>(0.0, 1.0)};
    const arma::vec t1 = align_phases(quad);
    CHECK(t1(0) == doctest::Approx(0.0));
    CHECK(t1(1) == doctest::Approx(-kTwoPi / 4.0));
    CHECK(combined_magnitude(quad, t1) == doctest::Approx(2.0).epsilon(1e-14));

    // A reference term pulls the elements onto its own phase.
    CascadeGains with_ref;
    with_ref.element_gains = {std::complex<double>(0.0, 2.0)};
    with_ref.reference = {3.0, 0.0};
    const arma::vec t2 = align_phases(with_ref);
    CHECK(t2(0) == doctest::Approx(-kTwoPi / 4.0));
    CHECK(combined_magnitude(with_ref, t2) == doctest::Approx(5.0).epsilon(1e-14));
}

TEST_CASE("aligned magnitude equals |reference| + sum of gain magnitudes") {
    StreamRng rng(31, {0, 0, 0, 0});
    for (int it = 0; it < 50; ++it) {
        CascadeGains g;
        g.element_gains.set_size(5);
        for (auto& v : g.element_gains) v = std::complex<double>(rng.gaussian(), rng.gaussian());
        g.reference = {rng.gaussian(), rng.gaussian()};
        const double got = combined_magnitude(g, align_phases(g));
        const double want = std::abs(g.reference) + arma::accu(arma::abs(g.element_gains));
        CHECK(got == doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("align_phases dominates a 16-level phase grid") {
    StreamRng rng(32, {0, 0, 1, 0});
    for (int it = 0; it < 20; ++it) {
        CascadeGains g;
        g.element_gains.set_size(3);
        for (auto& v : g.element_gains) v = std::complex<double>(rng.gaussian(), rng.gaussian());
        g.reference = {rng.gaussian(), rng.gaussian()};
        const double aligned = combined_magnitude(g, align_phases(g));
        CHECK(aligned >= grid_best(g, 16) - 1e-12);
    }
}

TEST_CASE("alignment is invariant to a common phase rotation") {
    StreamRng rng(33, {0, 0, 2, 0});
    for (int it = 0; it < 20; ++it) {
        CascadeGains g;
        g.element_gains.set_size(4);
        for (auto& v : g.element_gains) v = std::complex<double>(rng.gaussian(), rng.gaussian());
        g.reference = {rng.gaussian(), rng.gaussian()};

        CascadeGains rot = g;
        const std::complex<double> phase = std::polar(1.0, rng.phase());
        rot.element_gains *= phase;
        rot.reference *= phase;

        const double m0 = combined_magnitude(g, align_phases(g));
        const double m1 = combined_magnitude(rot, align_phases(rot));
        CHECK(m0 == doctest::Approx(m1).epsilon(1e-12));
    }
}

TEST_CASE("combined_magnitude rejects mismatched lengths") {
    CascadeGains g;
    g.element_gains.set_size(3);
    g.element_gains.ones();
    CHECK_THROWS_AS(combined_magnitude(g, arma::vec(2, arma::fill::zeros)), std::invalid_argument);
}

TEST_CASE("single-reflection toy reaches the closed-form optimum") {
    const std::size_t n = 16;
    const Scenario toy = single_reflection_toy(n);
    const ChannelSet cs = build_channel_set(toy, 0, 0);
    const std::vector<ReflectionBlock> blocks{{0, all_elements(n), 0}};
    const auto [rs, report] = optimize_reflections(cs, blocks, toy.radio);

    CHECK(report.converged);
    validate_reflection_state(cs, rs);

    // With one antenna and a pure LoS cascade, the optimum is
    // P * (n * a_bs * a_user)^2 with per-hop amplitudes from the path gains.
    const double a1 = db_to_amplitude(path_gain_db(distance(toy.bs.position, toy.irs[0].position), 2.2, -30.0));
    const double a2 =
        db_to_amplitude(path_gain_db(distance(toy.irs[0].position, toy.users[0].position), 2.2, -30.0));
    const double expect = db_to_linear(toy.radio.tx_power_dbm) * std::pow(static_cast<double>(n) * a1 * a2, 2.0);
    const double got = received_power_mw(effective_channel(cs, rs, 0).total, toy.radio);
    CHECK(got == doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("double-reflection toy reaches the closed-form optimum") {
    const std::size_t half = 3;
    const Scenario toy = double_reflection_toy(half, half);
    const ChannelSet cs = build_channel_set(toy, 0, 0);
    const std::vector<ReflectionBlock> blocks{{0, all_elements(half), 0}, {1, all_elements(half), 0}};
    const auto [rs, report] = optimize_reflections(cs, blocks, toy.radio);
    CHECK(report.converged);

    const double a1 = db_to_amplitude(path_gain_db(distance(toy.bs.position, toy.irs[0].position), 2.2, -30.0));
    const double as = db_to_amplitude(path_gain_db(distance(toy.irs[0].position, toy.irs[1].position), 2.2, -30.0));
    const double a2 =
        db_to_amplitude(path_gain_db(distance(toy.irs[1].position, toy.users[0].position), 2.2, -30.0));
    const double expect = db_to_linear(toy.radio.tx_power_dbm) *
                          std::pow(static_cast<double>(half * half) * a1 * as * a2, 2.0);
    const double got = received_power_mw(effective_channel(cs, rs, 0).total, toy.radio);
    CHECK(got == doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("block ascent beats a 16-level grid on the double toy") {
    const Scenario toy = double_reflection_toy(2, 2);
    const ChannelSet cs = build_channel_set(toy, 0, 0);
    const std::vector<ReflectionBlock> blocks{{0, all_elements(2), 0}, {1, all_elements(2), 0}};
    const auto [rs, report] = optimize_reflections(cs, blocks, toy.radio);
    const double opt = received_power_mw(effective_channel(cs, rs, 0).total, toy.radio);

    double best = 0.0;
    ReflectionState grid = zero_phase_state(cs);
    for (int p0 = 0; p0 < 16; ++p0)
        for (int p1 = 0; p1 < 16; ++p1)
            for (int p2 = 0; p2 < 16; ++p2)
                for (int p3 = 0; p3 < 16; ++p3) {
                    grid.coeffs[0](0) = std::polar(1.0, kTwoPi * p0 / 16.0);
                    grid.coeffs[0](1) = std::polar(1.0, kTwoPi * p1 / 16.0);
                    grid.coeffs[1](0) = std::polar(1.0, kTwoPi * p2 / 16.0);
                    grid.coeffs[1](1) = std::polar(1.0, kTwoPi * p3 / 16.0);
                    best = std::max(best, received_power_mw(effective_channel(cs, grid, 0).total, toy.radio));
                }
    CHECK(opt >= best - 1e-12 * opt);
}

TEST_CASE("power scaling ratios follow N^2 and N^4") {
    for (const std::size_t n : {16UL, 32UL, 64UL}) {
        const double p1 = received_power_scaling(n, ScalingLink::SingleReflection);
        const double p2 = received_power_scaling(2 * n, ScalingLink::SingleReflection);
        CHECK(p2 / p1 == doctest::Approx(4.0).epsilon(1e-9));

        const double q1 = received_power_scaling(n, ScalingLink::DoubleReflectionEqualSplit);
        const double q2 = received_power_scaling(2 * n, ScalingLink::DoubleReflectionEqualSplit);
        CHECK(q2 / q1 == doctest::Approx(16.0).epsilon(1e-9));
    }

    // Regression anchors for the absolute level.
    CHECK(received_power_scaling(64, ScalingLink::SingleReflection) ==
          doctest::Approx(1.8881292280061691e-09).epsilon(1e-9));
    CHECK(received_power_scaling(64, ScalingLink::DoubleReflectionEqualSplit) ==
          doctest::Approx(2.3229626640035025e-12).epsilon(1e-9));

    CHECK_THROWS_AS(received_power_scaling(65, ScalingLink::DoubleReflectionEqualSplit), std::invalid_argument);
    CHECK_THROWS_AS(received_power_scaling(0, ScalingLink::SingleReflection), std::invalid_argument);
    CHECK_THROWS_AS(double_reflection_toy(0, 4), std::invalid_argument);
}

TEST_CASE("objective trajectories are non-decreasing on fading channels") {
    const Scenario s = default_scenario();
    const std::vector<ReflectionBlock> blocks{
        {0, arma::regspace<arma::uvec>(0, 149), 0},
        {0, arma::regspace<arma::uvec>(150, 299), 1},
        {1, all_elements(50), 1},
        {2, all_elements(50), 2},
    };
    for (std::uint64_t trial = 0; trial < 10; ++trial) {
        const ChannelSet cs = build_channel_set(s, 1234, trial);
        const auto [rs, report] = optimize_reflections(cs, blocks, s.radio);
        validate_reflection_state(cs, rs);
        REQUIRE(report.objective_trajectory.size() ==
                1 + static_cast<std::size_t>(report.iterations) * blocks.size());
        for (std::size_t t = 1; t < report.objective_trajectory.size(); ++t)
            CHECK(report.objective_trajectory[t] >= report.objective_trajectory[t - 1]);
        CHECK(report.objective_trajectory.back() > report.objective_trajectory.front());
        CHECK(report.converged);
    }
}

TEST_CASE("elements outside every block follow the idle policy") {
    Scenario s = default_scenario();
    const std::vector<ReflectionBlock> blocks{{0, arma::regspace<arma::uvec>(0, 149), 0}};
    const ChannelSet cs = build_channel_set(s, 5, 0);

    // Zero-phase policy: untouched elements stay at exactly 1.
    const auto [rs_zero, rep_zero] = optimize_reflections(cs, blocks, s.radio);
    for (arma::uword n = 150; n < 300; ++n) CHECK(rs_zero.coeffs[0](n) == std::complex<double>(1.0, 0.0));
    for (arma::uword n = 0; n < 50; ++n) CHECK(rs_zero.coeffs[1](n) == std::complex<double>(1.0, 0.0));

    // Random-phase policy: untouched elements get reproducible unit-modulus
    // draws that depend on the idle stream.
    s.radio.idle_policy = IdlePolicy::RandomPhase;
    BeamformOptions opts;
    opts.idle_seed = 7;
    opts.idle_trial = 2;
    const auto [rs_a, rep_a] = optimize_reflections(cs, blocks, s.radio, opts);
    const auto [rs_b, rep_b] = optimize_reflections(cs, blocks, s.radio, opts);
    CHECK(arma::norm(rs_a.coeffs[1] - rs_b.coeffs[1]) == 0.0);
    CHECK(arma::norm(rs_a.coeffs[1] - arma::cx_vec(50, arma::fill::ones)) > 1e-3);
    for (const auto& c : rs_a.coeffs[1]) CHECK(std::abs(std::abs(c) - 1.0) < 1e-12);

    BeamformOptions other = opts;
    other.idle_seed = 8;
    const auto [rs_c, rep_c] = optimize_reflections(cs, blocks, s.radio, other);
    CHECK(arma::norm(rs_a.coeffs[1] - rs_c.coeffs[1]) > 1e-6);
}

TEST_CASE("no blocks means an untouched state and an empty trajectory") {
    const Scenario s = default_scenario();
    const ChannelSet cs = build_channel_set(s, 1, 0);
    const auto [rs, report] = optimize_reflections(cs, {}, s.radio);
    CHECK(report.converged);
    CHECK(report.iterations == 0);
    CHECK(report.objective_trajectory.empty());
    for (std::size_t i = 0; i < cs.elements.size(); ++i)
        CHECK(arma::norm(rs.coeffs[i] - arma::cx_vec(cs.elements[i], arma::fill::ones)) == 0.0);
}

TEST_CASE("invalid blocks are rejected") {
    const Scenario s = default_scenario();
    const ChannelSet cs = build_channel_set(s, 1, 0);

    CHECK_THROWS_AS(optimize_reflections(cs, {{9, all_elements(4), 0}}, s.radio), std::invalid_argument);
    CHECK_THROWS_AS(optimize_reflections(cs, {{0, all_elements(4), 17}}, s.radio), std::invalid_argument);
    CHECK_THROWS_AS(optimize_reflections(cs, {{1, all_elements(60), 0}}, s.radio), std::invalid_argument);

    // Overlapping blocks on the same panel.
    const std::vector<ReflectionBlock> overlap{{0, arma::regspace<arma::uvec>(0, 10), 0},
                                               {0, arma::regspace<arma::uvec>(10, 20), 1}};
    CHECK_THROWS_AS(optimize_reflections(cs, overlap, s.radio), std::invalid_argument);
}
