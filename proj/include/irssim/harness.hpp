// SPDX-License-Identifier: Apache-2.0
//
// Part of irssim, a link-level simulator for reflecting-surface deployment
// studies in multi-user cells.
//
// Harness: Monte-Carlo rate experiments over fading draws, the three-way
// deployment comparison, the element-count scaling study, and the CSV
// emitters.  All statistics are reduced in trial order with compensated
// sums, so serial and OpenMP runs agree to the bit.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "irssim/association.hpp"

namespace irssim {

struct ExperimentSpec {
    std::string label;      ///< strategy tag used in reports and CSV rows
    Scenario scenario;
    AllocationPlan allocation;
    std::size_t trials = 500;
    std::uint64_t seed = 0;
    SearchOptions search;   ///< association search + per-trial optimizer knobs
};

struct RateReport {
    std::string label;
    AllocationPlan allocation;
    std::vector<CommMode> modes;
    std::size_t trials = 0;
    std::uint64_t seed = 0;
    std::vector<double> user_rate_mean;   ///< per user, bit/s/Hz
    std::vector<double> user_rate_std;    ///< sample standard deviation
    double min_rate_mean = 0.0;           ///< mean of per-trial minima
    double min_rate_std = 0.0;
    std::vector<std::vector<double>> per_trial_rates;  ///< [trial][user]
};

/// Runs `spec.trials` independent fading draws: each trial draws a channel
/// set, re-optimizes the reflections for the fixed association, and records
/// every user's MRC rate.  The association itself is derived once from the
/// evaluation stream family, not from the reported trials.
RateReport run_experiment(const ExperimentSpec& spec, ExecPolicy policy = ExecPolicy::OpenMp);

/// Plain serial loop kept as the reference implementation; must produce a
/// report bit-identical to run_experiment under any policy.
RateReport run_experiment_reference(const ExperimentSpec& spec);

/// The three deployment strategies compared on one scenario with a shared
/// element budget B (the scenario's total panel count): everything on the
/// user side (B split over user-side panels), everything at the BS, and the
/// 3:1 hybrid split.  Throws std::invalid_argument when the scenario lacks a
/// side or B does not divide evenly.
std::vector<RateReport> compare_strategies(const Scenario& s, std::size_t trials, std::uint64_t seed,
                                           const SearchOptions& opts, ExecPolicy policy = ExecPolicy::OpenMp);

struct ScalingResult {
    ScalingLink kind = ScalingLink::SingleReflection;
    std::vector<std::size_t> n_elements;
    std::vector<double> power_mw;
    double slope = 0.0;  ///< log-log least-squares exponent
};

/// Optimized received power of the scaling toys over a grid of element
/// counts, with the fitted power-law exponent.  Requires at least two
/// strictly increasing counts.
ScalingResult scaling_study(const std::vector<std::size_t>& n_elements, ScalingLink kind,
                            ExecPolicy policy = ExecPolicy::OpenMp);

/// CSV emitters.  Numbers are printed with 17 significant digits, so equal
/// results give byte-identical files.
void write_rate_csv(std::ostream& out, const std::vector<RateReport>& reports);
void write_scaling_csv(std::ostream& out, const std::vector<ScalingResult>& results, std::uint64_t seed);
void write_partition_csv(std::ostream& out, const std::vector<std::string>& methods,
                         const std::vector<PartitionAssignment>& partitions, const std::vector<double>& scores,
                         std::uint64_t seed);
void write_allocation_csv(std::ostream& out, const std::vector<std::string>& methods,
                          const std::vector<AllocationPlan>& plans, const std::vector<double>& scores,
                          std::uint64_t seed);

}  // namespace irssim
