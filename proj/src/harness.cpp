// SPDX-License-Identifier: Apache-2.0
//
// Part of irssim, a link-level simulator for reflecting-surface deployment
// studies in multi-user cells.

#include "irssim/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

#include "irssim/format.hpp"

namespace irssim {

namespace {

/// Folds the per-trial rate matrix into the report statistics.  Everything
/// is accumulated in trial order with compensated sums: the aggregation is
/// the same no matter how the trials were scheduled.
void aggregate(RateReport& report) {
    const std::size_t trials = report.per_trial_rates.size();
    const std::size_t n_users = report.per_trial_rates.front().size();

    report.user_rate_mean.assign(n_users, 0.0);
    report.user_rate_std.assign(n_users, 0.0);

    std::vector<CompensatedSum> sums(n_users);
    CompensatedSum min_sum;
    for (std::size_t t = 0; t < trials; ++t) {
        double worst = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < n_users; ++k) {
            sums[k].add(report.per_trial_rates[t][k]);
            worst = std::min(worst, report.per_trial_rates[t][k]);
        }
        min_sum.add(worst);
    }
    for (std::size_t k = 0; k < n_users; ++k) report.user_rate_mean[k] = sums[k].value() / trials;
    report.min_rate_mean = min_sum.value() / trials;

    if (trials > 1) {
        std::vector<CompensatedSum> sq(n_users);
        CompensatedSum min_sq;
        for (std::size_t t = 0; t < trials; ++t) {
            double worst = std::numeric_limits<double>::infinity();
            for (std::size_t k = 0; k < n_users; ++k) {
                const double d = report.per_trial_rates[t][k] - report.user_rate_mean[k];
                sq[k].add(d * d);
                worst = std::min(worst, report.per_trial_rates[t][k]);
            }
            const double dm = worst - report.min_rate_mean;
            min_sq.add(dm * dm);
        }
        for (std::size_t k = 0; k < n_users; ++k)
            report.user_rate_std[k] = std::sqrt(sq[k].value() / (trials - 1));
        report.min_rate_std = std::sqrt(min_sq.value() / (trials - 1));
    }
}

std::vector<double> trial_rates(const Scenario& sized, const std::vector<ReflectionBlock>& blocks,
                                std::uint64_t seed, std::uint64_t trial, const BeamformOptions& base_opts) {
    const ChannelSet cs = build_channel_set(sized, seed, trial);
    BeamformOptions bf = base_opts;
    bf.idle_seed = seed;
    bf.idle_trial = trial;
    const auto [rs, report] = optimize_reflections(cs, blocks, sized.radio, bf);
    (void)report;
    std::vector<double> rates(sized.users.size());
    for (std::size_t k = 0; k < sized.users.size(); ++k)
        rates[k] = rate_bps_hz(mrc_snr(effective_channel(cs, rs, k).total, sized.radio));
    return rates;
}

void check_spec(const ExperimentSpec& spec) {
    if (spec.trials == 0) throw std::invalid_argument("an experiment needs at least one trial");
    if (spec.scenario.users.empty()) throw std::invalid_argument("an experiment needs at least one user");
}

RateReport make_report_shell(const ExperimentSpec& spec, const AssociationPlan& plan) {
    RateReport report;
    report.label = spec.label;
    report.allocation = spec.allocation;
    report.modes = plan.modes;
    report.trials = spec.trials;
    report.seed = spec.seed;
    report.per_trial_rates.resize(spec.trials);
    return report;
}

/// The association search draws its scoring fading from a stream family
/// derived from the experiment seed, never from the reported trials.
SearchOptions search_for(const ExperimentSpec& spec) {
    SearchOptions so = spec.search;
    so.seed = spec.seed;
    return so;
}

}  // namespace

RateReport run_experiment(const ExperimentSpec& spec, ExecPolicy policy) {
    check_spec(spec);
    const Scenario sized = apply_allocation(spec.scenario, spec.allocation);
    const SearchOptions so = search_for(spec);
    const AssociationPlan plan = build_association(spec.scenario, spec.allocation, so, policy);
    const auto blocks = blocks_for_plan(sized, plan);

    RateReport report = make_report_shell(spec, plan);
    parallel_for(policy, spec.trials, [&](std::size_t t) {
        report.per_trial_rates[t] = trial_rates(sized, blocks, spec.seed, t, so.beamform);
    });
    aggregate(report);
    return report;
}

RateReport run_experiment_reference(const ExperimentSpec& spec) {
    check_spec(spec);
    const Scenario sized = apply_allocation(spec.scenario, spec.allocation);
    const SearchOptions so = search_for(spec);
    const AssociationPlan plan = build_association(spec.scenario, spec.allocation, so, ExecPolicy::Serial);
    const auto blocks = blocks_for_plan(sized, plan);

    RateReport report = make_report_shell(spec, plan);
    for (std::size_t t = 0; t < spec.trials; ++t)
        report.per_trial_rates[t] = trial_rates(sized, blocks, spec.seed, t, so.beamform);
    aggregate(report);
    return report;
}

std::vector<RateReport> compare_strategies(const Scenario& s, std::size_t trials, std::uint64_t seed,
                                           const SearchOptions& opts, ExecPolicy policy) {
    std::vector<std::size_t> bs_panels, user_panels;
    for (std::size_t i = 0; i < s.irs.size(); ++i)
        (s.irs[i].side == IrsSide::BsSide ? bs_panels : user_panels).push_back(i);
    if (bs_panels.empty() || user_panels.empty())
        throw std::invalid_argument("the comparison needs panels on both sides");

    std::size_t budget = 0;
    for (const auto& p : s.irs) budget += p.elements();
    if (budget == 0) throw std::invalid_argument("the comparison needs a non-zero element budget");
    if (budget % (4 * bs_panels.size()) != 0 || budget % (4 * user_panels.size()) != 0)
        throw std::invalid_argument("element budget does not split evenly across the strategies");

    const auto alloc_for = [&](std::size_t per_bs, std::size_t per_user) {
        AllocationPlan alloc;
        alloc.elements.assign(s.irs.size(), 0);
        for (std::size_t i : bs_panels) alloc.elements[i] = per_bs;
        for (std::size_t j : user_panels) alloc.elements[j] = per_user;
        return alloc;
    };

    std::vector<ExperimentSpec> specs(3);
    specs[0].label = "user_side";
    specs[0].allocation = alloc_for(0, budget / user_panels.size());
    specs[1].label = "bs_side";
    specs[1].allocation = alloc_for(budget / bs_panels.size(), 0);
    specs[2].label = "hybrid";
    specs[2].allocation = alloc_for(3 * budget / 4 / bs_panels.size(), budget / 4 / user_panels.size());

    std::vector<RateReport> reports;
    for (auto& spec : specs) {
        spec.scenario = s;
        spec.trials = trials;
        spec.seed = seed;
        spec.search = opts;
        reports.push_back(run_experiment(spec, policy));
    }
    return reports;
}

ScalingResult scaling_study(const std::vector<std::size_t>& n_elements, ScalingLink kind, ExecPolicy policy) {
    if (n_elements.size() < 2)
        throw std::invalid_argument("the scaling fit needs at least two element counts");
    for (std::size_t i = 1; i < n_elements.size(); ++i)
        if (n_elements[i] <= n_elements[i - 1])
            throw std::invalid_argument("element counts must be strictly increasing");

    ScalingResult result;
    result.kind = kind;
    result.n_elements = n_elements;
    result.power_mw.resize(n_elements.size());
    parallel_for(policy, n_elements.size(),
                 [&](std::size_t i) { result.power_mw[i] = received_power_scaling(n_elements[i], kind); });

    // Least-squares slope in log-log coordinates.
    const std::size_t n = n_elements.size();
    double mx = 0.0, my = 0.0;
    std::vector<double> xs(n), ys(n);
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = std::log10(static_cast<double>(n_elements[i]));
        ys[i] = std::log10(result.power_mw[i]);
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        num += (xs[i] - mx) * (ys[i] - my);
        den += (xs[i] - mx) * (xs[i] - mx);
    }
    result.slope = num / den;
    return result;
}

void write_rate_csv(std::ostream& out, const std::vector<RateReport>& reports) {
    out << "strategy,metric,user,mean,std,trials,seed\n";
    for (const auto& r : reports) {
        for (std::size_t k = 0; k < r.user_rate_mean.size(); ++k)
            out << r.label << ",rate," << (k + 1) << ',' << format_full(r.user_rate_mean[k]) << ','
                << format_full(r.user_rate_std[k]) << ',' << r.trials << ',' << r.seed << '\n';
        out << r.label << ",min_rate,," << format_full(r.min_rate_mean) << ',' << format_full(r.min_rate_std)
            << ',' << r.trials << ',' << r.seed << '\n';
    }
}

void write_scaling_csv(std::ostream& out, const std::vector<ScalingResult>& results, std::uint64_t seed) {
    out << "study,n,power_mw,slope,seed\n";
    for (const auto& r : results) {
        const char* name = r.kind == ScalingLink::SingleReflection ? "single_reflection" : "double_reflection";
        for (std::size_t i = 0; i < r.n_elements.size(); ++i)
            out << name << ',' << r.n_elements[i] << ',' << format_full(r.power_mw[i]) << ','
                << format_full(r.slope) << ',' << seed << '\n';
    }
}

void write_partition_csv(std::ostream& out, const std::vector<std::string>& methods,
                         const std::vector<PartitionAssignment>& partitions, const std::vector<double>& scores,
                         std::uint64_t seed) {
    if (methods.size() != partitions.size() || methods.size() != scores.size())
        throw std::invalid_argument("write_partition_csv: column length mismatch");
    out << "method,subsurface,user,score,seed\n";
    for (std::size_t m = 0; m < methods.size(); ++m)
        for (std::size_t sub = 0; sub < partitions[m].user.size(); ++sub) {
            out << methods[m] << ',' << sub << ',';
            if (partitions[m].user[sub]) out << (*partitions[m].user[sub] + 1);
            out << ',' << format_full(scores[m]) << ',' << seed << '\n';
        }
}

void write_allocation_csv(std::ostream& out, const std::vector<std::string>& methods,
                          const std::vector<AllocationPlan>& plans, const std::vector<double>& scores,
                          std::uint64_t seed) {
    if (methods.size() != plans.size() || methods.size() != scores.size())
        throw std::invalid_argument("write_allocation_csv: column length mismatch");
    out << "method,panel,elements,score,seed\n";
    for (std::size_t m = 0; m < methods.size(); ++m)
        for (std::size_t i = 0; i < plans[m].elements.size(); ++i)
            out << methods[m] << ',' << (i + 1) << ',' << plans[m].elements[i] << ',' << format_full(scores[m])
                << ',' << seed << '\n';
}

}  // namespace irssim
