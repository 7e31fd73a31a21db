// SPDX-License-Identifier: Apache-2.0
//
// Part of irssim, a link-level simulator for reflecting-surface deployment
// studies in multi-user cells.
//
// Acceptance gate.  Eight end-to-end checks, one per headline property of
// the study: the deployment-strategy ordering and its bottleneck users, the
// N^2 / N^4 received-power scaling laws, equal-split allocation on the
// double-reflection toy, optimality of the phase alignment against brute
// force, dominance of the exhaustive partition oracle plus the weak-user
// priority, the fading statistics, and byte-identical CLI reruns.  Each
// criterion prints one PASS/FAIL line with its measured evidence and wall
// time; the exit code is the number of failures.
//
// Usage: acceptance <path-to-cli-binary>

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "irssim/harness.hpp"
#include "irssim/rng.hpp"

using namespace irssim;

namespace {

int g_failures = 0;

void report(int criterion, bool ok, const std::string& evidence, double seconds) {
    std::printf("%s criterion %d: %s (%.2f s)\n", ok ? "PASS" : "FAIL", criterion, evidence.c_str(), seconds);
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

std::string fmt(const char* format, ...) {
    char buf[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof(buf), format, args);
    va_end(args);
    return buf;
}

/// Index of the strictly smallest entry, or nullopt when the minimum is tied.
std::optional<std::size_t> strict_argmin(const std::vector<double>& v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] < v[best]) best = i;
    for (std::size_t i = 0; i < v.size(); ++i)
        if (i != best && v[i] <= v[best]) return std::nullopt;
    return best;
}

// --------------------------------------------------------------------------
// Criteria 1 + 2: strategy ordering and bottleneck users on the default
// cell, 100 fading draws, seed 42.  The two criteria share one run.
// --------------------------------------------------------------------------

void criteria_ordering_and_bottlenecks() {
    const double t0 = omp_get_wtime();
    SearchOptions opts;
    opts.eval_trials = 2;
    opts.subsurfaces = 10;
    opts.partition = PartitionMethod::Exhaustive;
    const auto reports = compare_strategies(default_scenario(), 100, 42, opts);
    const double secs = omp_get_wtime() - t0;

    const RateReport& user_side = reports[0];
    const RateReport& bs_side = reports[1];
    const RateReport& hybrid = reports[2];
    const auto se = [](const RateReport& r) { return r.min_rate_std / std::sqrt(static_cast<double>(r.trials)); };

    const double gap_lo = bs_side.min_rate_mean - user_side.min_rate_mean;
    const double gap_hi = hybrid.min_rate_mean - bs_side.min_rate_mean;
    const bool ordered = user_side.min_rate_mean < bs_side.min_rate_mean && bs_side.min_rate_mean < hybrid.min_rate_mean;
    const bool separated = gap_lo > 3.0 * std::max(se(user_side), se(bs_side)) &&
                           gap_hi > 3.0 * std::max(se(bs_side), se(hybrid));
    report(1, ordered && separated && secs < 300.0,
           fmt("min-rate user_side %.4f < bs_side %.4f < hybrid %.4f bit/s/Hz, gaps %.3f / %.3f > 3x std. error",
               user_side.min_rate_mean, bs_side.min_rate_mean, hybrid.min_rate_mean, gap_lo, gap_hi),
           secs);

    const auto user_bottleneck = strict_argmin(user_side.user_rate_mean);
    const auto bs_bottleneck = strict_argmin(bs_side.user_rate_mean);
    const bool ok2 = user_bottleneck == std::optional<std::size_t>{0} && bs_bottleneck == std::optional<std::size_t>{2};
    report(2, ok2,
           fmt("bottleneck user %zu under user_side, user %zu under bs_side (want 1 and 3)",
               user_bottleneck ? *user_bottleneck + 1 : 0, bs_bottleneck ? *bs_bottleneck + 1 : 0),
           0.0);
}

// --------------------------------------------------------------------------
// Criterion 3: received-power scaling exponents over N in {64, ..., 1024}.
// --------------------------------------------------------------------------

void criterion_scaling_laws() {
    const double t0 = omp_get_wtime();
    const std::vector<std::size_t> counts{64, 128, 256, 512, 1024};
    const ScalingResult single = scaling_study(counts, ScalingLink::SingleReflection);
    const ScalingResult dbl = scaling_study(counts, ScalingLink::DoubleReflectionEqualSplit);
    const double secs = omp_get_wtime() - t0;
    const bool ok = std::abs(single.slope - 2.0) <= 0.1 && std::abs(dbl.slope - 4.0) <= 0.1 && secs < 30.0;
    report(3, ok, fmt("power-law slopes %.4f (single, want 2.0 +- 0.1) and %.4f (double, want 4.0 +- 0.1)",
                      single.slope, dbl.slope),
           secs);
}

// --------------------------------------------------------------------------
// Criterion 4: the element-budget sweep splits the double-reflection toy
// evenly, N = 64 at granularity 8 -> (32, 32).
// --------------------------------------------------------------------------

void criterion_equal_split() {
    const double t0 = omp_get_wtime();
    const Scenario toy = double_reflection_toy(32, 32);
    SearchOptions opts;
    opts.eval_trials = 2;
    opts.subsurfaces = 1;
    const AllocationPlan sweep = allocate_elements(toy, 64, 8, AllocationMethod::Sweep, opts);
    const AllocationPlan relax = allocate_elements(toy, 64, 8, AllocationMethod::RelaxAndRound, opts);
    const double secs = omp_get_wtime() - t0;
    const bool ok = sweep == AllocationPlan{{32, 32}} && relax == AllocationPlan{{32, 32}} && secs < 30.0;
    report(4, ok,
           fmt("64 elements at granularity 8 split as (%zu, %zu) sweep / (%zu, %zu) relax (want 32, 32)",
               sweep.elements[0], sweep.elements[1], relax.elements[0], relax.elements[1]),
           secs);
}

// --------------------------------------------------------------------------
// Criterion 5: phase alignment and the block ascent match exhaustive
// 16-level phase grids within grid resolution, and every optimizer
// trajectory is non-decreasing.
// --------------------------------------------------------------------------

double grid_best_magnitude(const CascadeGains& gains, std::size_t levels) {
    const std::size_t n = gains.element_gains.n_elem;
    std::vector<std::size_t> idx(n, 0);
    arma::vec theta(n, arma::fill::zeros);
    double best = 0.0;
    while (true) {
        for (std::size_t e = 0; e < n; ++e)
            theta[e] = 2.0 * arma::datum::pi * static_cast<double>(idx[e]) / static_cast<double>(levels);
        best = std::max(best, combined_magnitude(gains, theta));
        std::size_t e = 0;
        while (e < n && ++idx[e] == levels) idx[e++] = 0;
        if (e == n) break;
    }
    return best;
}

void criterion_beamforming_oracle() {
    const double t0 = omp_get_wtime();
    const std::size_t kLevels = 16;
    // Phase alignment on random 3-element cascades: at least as good as the
    // grid, and the grid reaches it up to the quantization loss cos(pi/16).
    bool align_ok = true;
    for (std::uint64_t i = 0; i < 100 && align_ok; ++i) {
        StreamRng rng(11, StreamTag{i, stream_kind::eval, 0, 0});
        CascadeGains gains;
        gains.element_gains.set_size(3);
        for (auto& g : gains.element_gains) g = rng.cgaussian();
        gains.reference = i % 2 == 0 ? rng.cgaussian() : std::complex<double>{0.0, 0.0};
        const double aligned = combined_magnitude(gains, align_phases(gains));
        const double grid = grid_best_magnitude(gains, kLevels);
        align_ok = aligned >= grid - 1e-9 && grid >= aligned * std::cos(arma::datum::pi / kLevels) - 1e-9;
    }

    // Block ascent on the 2+2-element double-reflection toy against the full
    // 16^4 phase grid.
    const Scenario toy = double_reflection_toy(2, 2);
    const ChannelSet cs = build_channel_set(toy, 0, 0);
    std::vector<ReflectionBlock> blocks(2);
    blocks[0] = {0, arma::regspace<arma::uvec>(0, 1), 0};
    blocks[1] = {1, arma::regspace<arma::uvec>(0, 1), 0};
    const auto [rs, rep] = optimize_reflections(cs, blocks, toy.radio);
    (void)rep;
    const double opt_power = received_power_mw(effective_channel(cs, rs, 0).total, toy.radio);

    double grid_power = 0.0;
    ReflectionState grid_rs = zero_phase_state(cs);
    std::vector<std::size_t> idx(4, 0);
    while (true) {
        for (std::size_t e = 0; e < 4; ++e)
            grid_rs.coeffs[e / 2][e % 2] =
                std::polar(1.0, 2.0 * arma::datum::pi * static_cast<double>(idx[e]) / kLevels);
        grid_power = std::max(grid_power, received_power_mw(effective_channel(cs, grid_rs, 0).total, toy.radio));
        std::size_t e = 0;
        while (e < 4 && ++idx[e] == kLevels) idx[e++] = 0;
        if (e == 4) break;
    }
    const bool ascent_ok = opt_power >= grid_power * (1.0 - 1e-9);

    // Non-decreasing objective trajectories across 100 fading draws of the
    // default cell under the canonical hybrid block layout.
    const Scenario cell = default_scenario();
    std::vector<ReflectionBlock> hybrid(4);
    hybrid[0] = {0, arma::regspace<arma::uvec>(0, 149), 0};
    hybrid[1] = {0, arma::regspace<arma::uvec>(150, 299), 1};
    hybrid[2] = {1, arma::regspace<arma::uvec>(0, 49), 1};
    hybrid[3] = {2, arma::regspace<arma::uvec>(0, 49), 2};
    bool monotone = true;
    for (std::uint64_t t = 0; t < 100 && monotone; ++t) {
        const ChannelSet draw = build_channel_set(cell, 7, t);
        const auto [state, run] = optimize_reflections(draw, hybrid, cell.radio);
        (void)state;
        for (std::size_t i = 1; i < run.objective_trajectory.size() && monotone; ++i)
            monotone = run.objective_trajectory[i] >= run.objective_trajectory[i - 1];
    }

    const double secs = omp_get_wtime() - t0;
    report(5, align_ok && ascent_ok && monotone && secs < 60.0,
           fmt("alignment vs 16-level grid %s; ascent %.6g mW vs grid %.6g mW; 100 trajectories %s",
               align_ok ? "matched" : "MISMATCH", opt_power, grid_power,
               monotone ? "non-decreasing" : "NOT MONOTONE"),
           secs);
}

// --------------------------------------------------------------------------
// Criterion 6: the exhaustive partition oracle dominates the statistical
// integer program on random small cells, and the integer program gives the
// weaker of two users at least half the subsurfaces.
// --------------------------------------------------------------------------

Scenario random_cell(StreamRng& rng) {
    Scenario s;
    s.bs.position = {0.0, 0.0, 10.0};
    s.bs.antennas = 6;
    IrsPanel p;
    p.position = {-5.0, 0.0, 8.0};
    p.normal = {1.0, 0.0, 0.0};
    p.side = IrsSide::BsSide;
    s.irs = {p};
    for (std::size_t k = 0; k < 3; ++k)
        s.users.push_back(User{{30.0 + 170.0 * rng.uniform(), -60.0 + 120.0 * rng.uniform(), 1.5}});
    validate_scenario(s);
    return s;
}

double partition_score(const Scenario& s, const AllocationPlan& alloc, const PartitionAssignment& part,
                       const SearchOptions& opts) {
    AssociationPlan plan;
    plan.modes = select_modes(s, alloc);
    plan.local_user = local_users(apply_allocation(s, alloc));
    plan.partitions[0] = part;
    return evaluate_association(s, alloc, plan, opts);
}

void criterion_partition_oracle() {
    const double t0 = omp_get_wtime();
    bool dominant = true;
    std::size_t checked = 0;
    for (std::uint64_t i = 0; i < 50 && dominant; ++i) {
        StreamRng rng(23, StreamTag{i, stream_kind::eval, 0, 0});
        const Scenario s = random_cell(rng);
        const std::size_t subsurfaces = 2 + i % 5;  // S in {2, ..., 6}
        const AllocationPlan alloc{{subsurfaces * 20}};
        SearchOptions opts;
        opts.eval_trials = 2;
        opts.seed = i;

        const PartitionAssignment oracle = exhaustive_partition(s, alloc, 0, subsurfaces, opts);
        const PartitionAssignment ip = statistical_partition_ip(estimated_power_curves(s, alloc, 0, subsurfaces));
        dominant = partition_score(s, alloc, oracle, opts) >= partition_score(s, alloc, ip, opts) - 1e-12;
        ++checked;
    }

    // Two users with a ~10 dB direct-gain gap: the weaker one must receive
    // at least half of the subsurfaces.
    Scenario pair;
    pair.bs.position = {0.0, 0.0, 10.0};
    pair.bs.antennas = 6;
    IrsPanel p;
    p.position = {-5.0, 0.0, 8.0};
    p.normal = {1.0, 0.0, 0.0};
    p.side = IrsSide::BsSide;
    pair.irs = {p};
    pair.users = {User{{100.0, 10.0, 1.5}}, User{{215.0, 10.0, 1.5}}};
    validate_scenario(pair);
    const AllocationPlan alloc{{200}};
    const PartitionAssignment part = statistical_partition_ip(estimated_power_curves(pair, alloc, 0, 4));
    std::size_t weak_share = 0;
    for (const auto& owner : part.user)
        if (owner == 1) ++weak_share;

    const double secs = omp_get_wtime() - t0;
    report(6, dominant && checked == 50 && weak_share >= 2 && secs < 120.0,
           fmt("oracle >= integer program on %zu/50 random cells; weak user holds %zu/4 subsurfaces", checked,
               weak_share),
           secs);
}

// --------------------------------------------------------------------------
// Criterion 7: fading statistics.  Rayleigh mean power matches the path
// gain within 3% at 1e5 draws; the Rician LoS power fraction matches
// K/(K+1) within 2% at K = 5 dB.
// --------------------------------------------------------------------------

void criterion_channel_statistics() {
    const double t0 = omp_get_wtime();
    const std::size_t kDraws = 100000;
    const ArrayGeometry scalar = ArrayGeometry::single();
    const Vec3 dir{1.0, 0.0, 0.0};

    const LinkModel rayleigh{FadingLaw::Rayleigh, 3.0, 0.0};
    const double pg = db_to_linear(path_gain_db(10.0, 3.0, -30.0));
    double power = 0.0;
    for (std::uint64_t i = 0; i < kDraws; ++i)
        power += std::norm(draw_channel(rayleigh, scalar, scalar, 10.0, dir, dir, -30.0, 3, {i, 0, 0, 0})(0, 0));
    power /= static_cast<double>(kDraws);
    const double rayleigh_err = std::abs(power - pg) / pg;

    const LinkModel rician{FadingLaw::Rician, 2.5, 5.0};
    const double k_lin = db_to_linear(5.0);
    std::complex<double> mean{0.0, 0.0};
    double rician_power = 0.0;
    for (std::uint64_t i = 0; i < kDraws; ++i) {
        const std::complex<double> h = draw_channel(rician, scalar, scalar, 40.0, dir, dir, -30.0, 4, {i, 0, 0, 0})(0, 0);
        mean += h;
        rician_power += std::norm(h);
    }
    mean /= static_cast<double>(kDraws);
    rician_power /= static_cast<double>(kDraws);
    const double los_fraction = std::norm(mean) / rician_power;
    const double want_fraction = k_lin / (k_lin + 1.0);
    const double rician_err = std::abs(los_fraction - want_fraction) / want_fraction;

    const double secs = omp_get_wtime() - t0;
    report(7, rayleigh_err <= 0.03 && rician_err <= 0.02 && secs < 30.0,
           fmt("Rayleigh mean power off by %.2f%% (limit 3%%); LoS fraction %.4f vs %.4f, off by %.2f%% (limit 2%%)",
               100.0 * rayleigh_err, los_fraction, want_fraction, 100.0 * rician_err),
           secs);
}

// --------------------------------------------------------------------------
// Criterion 8: every CLI subcommand writes byte-identical CSV when re-run
// with the same seed, including a serial re-run of the parallel commands.
// --------------------------------------------------------------------------

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

bool identical_runs(const std::string& cli, const std::string& command, const std::string& name) {
    const std::string file_a = "accept_" + name + "_a.csv";
    const std::string file_b = "accept_" + name + "_b.csv";
    const std::string file_c = "accept_" + name + "_serial.csv";
    const std::string base = "\"" + cli + "\" " + command;
    if (std::system((base + " --out " + file_a).c_str()) != 0) return false;
    if (std::system((base + " --out " + file_b).c_str()) != 0) return false;
    if (std::system((base + " --serial --out " + file_c).c_str()) != 0) return false;
    const std::string a = slurp(file_a);
    const bool ok = !a.empty() && a == slurp(file_b) && a == slurp(file_c);
    std::remove(file_a.c_str());
    std::remove(file_b.c_str());
    std::remove(file_c.c_str());
    return ok;
}

void criterion_cli_determinism(const std::string& cli) {
    const double t0 = omp_get_wtime();
    const bool compare_ok =
        identical_runs(cli, "compare --trials 5 --seed 42 --eval-trials 2 --partition ip", "compare");
    const bool scaling_ok = identical_runs(cli, "scaling --n 64 --n 128 --n 256 --seed 7", "scaling");
    const bool partition_ok =
        identical_runs(cli, "partition --alloc 400,0,0 --subsurfaces 4 --eval-trials 2 --seed 3", "partition");
    const bool allocate_ok =
        identical_runs(cli, "allocate --granularity 100 --eval-trials 2 --seed 5", "allocate");
    const double secs = omp_get_wtime() - t0;
    report(8, compare_ok && scaling_ok && partition_ok && allocate_ok,
           fmt("byte-identical reruns: compare %s, scaling %s, partition %s, allocate %s",
               compare_ok ? "yes" : "NO", scaling_ok ? "yes" : "NO", partition_ok ? "yes" : "NO",
               allocate_ok ? "yes" : "NO"),
           secs);
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: %s <path-to-cli-binary>\n", argv[0]);
        return 64;
    }
    const double t0 = omp_get_wtime();

    criteria_ordering_and_bottlenecks();
    criterion_scaling_laws();
    criterion_equal_split();
    criterion_beamforming_oracle();
    criterion_partition_oracle();
    criterion_channel_statistics();
    criterion_cli_determinism(argv[1]);

    std::printf("%d of 8 criteria passed (%.1f s total)\n", 8 - g_failures, omp_get_wtime() - t0);
    return g_failures;
}
