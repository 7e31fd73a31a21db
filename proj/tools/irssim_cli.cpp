// SPDX-License-Identifier: Apache-2.0
//
// Part of irssim, a link-level simulator for reflecting-surface deployment
// studies in multi-user cells.
//
// Command-line front end: compare deployment strategies, probe the
// power-scaling laws, and run the partition / allocation searches, emitting
// CSV either to a file or stdout.

#include <CLI11.hpp>
#include <omp.h>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "irssim/harness.hpp"

namespace {

using namespace irssim;

Scenario scenario_from(const std::string& path) {
    return path.empty() ? default_scenario() : load_scenario(path);
}

/// Runs `body(out)` against the chosen sink: --out file or stdout.
template <typename Body>
void with_output(const std::string& out_path, const Body& body) {
    if (out_path.empty()) {
        body(std::cout);
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write output file '" + out_path + "'");
    body(out);
}

AllocationPlan parse_alloc(const std::string& text, std::size_t n_panels) {
    AllocationPlan alloc;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        try {
            const long long v = std::stoll(item);
            if (v < 0) throw std::invalid_argument("negative");
            alloc.elements.push_back(static_cast<std::size_t>(v));
        } catch (const std::exception&) {
            throw std::runtime_error("bad --alloc entry '" + item + "'");
        }
    }
    if (alloc.elements.size() != n_panels)
        throw std::runtime_error("--alloc needs one element count per panel (" + std::to_string(n_panels) + ")");
    return alloc;
}

struct CommonArgs {
    std::string scenario_path;
    std::string out_path;
    std::uint64_t seed = 0;
    std::size_t subsurfaces = 10;
    std::size_t eval_trials = 10;
    std::string partition = "exhaustive";
    bool serial = false;
    int threads = 0;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_scenario = true) {
    if (with_scenario)
        cmd->add_option("--scenario", args.scenario_path, "scenario config file (default: bundled topology)");
    cmd->add_option("--out", args.out_path, "CSV output file (default: stdout)");
    cmd->add_option("--seed", args.seed, "master seed for the fading draws");
    cmd->add_flag("--serial", args.serial, "run the serial reference implementation");
    cmd->add_option("--threads", args.threads, "OpenMP thread count (default: runtime choice)");
}

SearchOptions search_from(const CommonArgs& args) {
    SearchOptions opts;
    opts.eval_trials = args.eval_trials;
    opts.seed = args.seed;
    opts.subsurfaces = args.subsurfaces;
    opts.partition =
        args.partition == "ip" ? PartitionMethod::StatisticalIp : PartitionMethod::Exhaustive;
    return opts;
}

ExecPolicy policy_from(const CommonArgs& args) {
    if (args.threads > 0) omp_set_num_threads(args.threads);
    return args.serial ? ExecPolicy::Serial : ExecPolicy::OpenMp;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"link-level study of reflecting-surface deployment strategies"};
    app.require_subcommand(1);

    CommonArgs args;

    auto* compare = app.add_subcommand("compare", "min-rate comparison of the three deployment strategies");
    std::size_t trials = 500;
    add_common(compare, args);
    compare->add_option("--trials", trials, "Monte-Carlo fading draws per strategy");
    compare->add_option("--subsurfaces", args.subsurfaces, "BS-side panel subsurface count");
    compare->add_option("--eval-trials", args.eval_trials, "fading draws per search candidate");
    compare->add_option("--partition", args.partition, "partition method: exhaustive | ip")
        ->check(CLI::IsMember({"exhaustive", "ip"}));

    auto* scaling = app.add_subcommand("scaling", "received-power scaling of the reflection cascades");
    std::vector<std::size_t> ns{64, 128, 256, 512, 1024};
    add_common(scaling, args, false);
    scaling->add_option("--n", ns, "element counts to probe");

    auto* partition = app.add_subcommand("partition", "subsurface partition of the BS-side panel");
    std::string alloc_text;
    std::optional<std::size_t> panel_opt;
    add_common(partition, args);
    partition->add_option("--alloc", alloc_text, "per-panel element counts, e.g. 300,50,50");
    partition->add_option("--subsurfaces", args.subsurfaces, "subsurface count");
    partition->add_option("--eval-trials", args.eval_trials, "fading draws per candidate");
    partition->add_option("--panel", panel_opt, "panel index (default: first BS-side panel)");

    auto* allocate = app.add_subcommand("allocate", "element-budget split across the panels");
    std::size_t total = 0;
    std::size_t granularity = 50;
    std::string method = "sweep";
    std::string score_partition = "ip";  // exhaustive partitions per candidate get expensive fast
    add_common(allocate, args);
    allocate->add_option("--total", total, "element budget (default: scenario total)");
    allocate->add_option("--granularity", granularity, "allocation step in elements");
    allocate->add_option("--method", method, "search method: sweep | relax")
        ->check(CLI::IsMember({"sweep", "relax"}));
    allocate->add_option("--subsurfaces", args.subsurfaces, "BS-side panel subsurface count");
    allocate->add_option("--eval-trials", args.eval_trials, "fading draws per candidate");
    allocate
        ->add_option("--partition", score_partition,
                     "partition method used while scoring: exhaustive | ip (default: ip)")
        ->check(CLI::IsMember({"exhaustive", "ip"}));

    CLI11_PARSE(app, argc, argv);

    try {
        const ExecPolicy policy = policy_from(args);

        if (compare->parsed()) {
            const Scenario s = scenario_from(args.scenario_path);
            const auto reports = compare_strategies(s, trials, args.seed, search_from(args), policy);
            with_output(args.out_path, [&](std::ostream& out) { write_rate_csv(out, reports); });
        } else if (scaling->parsed()) {
            std::vector<ScalingResult> results;
            results.push_back(scaling_study(ns, ScalingLink::SingleReflection, policy));
            results.push_back(scaling_study(ns, ScalingLink::DoubleReflectionEqualSplit, policy));
            with_output(args.out_path, [&](std::ostream& out) { write_scaling_csv(out, results, args.seed); });
        } else if (partition->parsed()) {
            const Scenario s = scenario_from(args.scenario_path);
            AllocationPlan alloc;
            if (alloc_text.empty())
                for (const auto& p : s.irs) alloc.elements.push_back(p.elements());
            else
                alloc = parse_alloc(alloc_text, s.irs.size());

            std::size_t panel = 0;
            if (panel_opt) {
                panel = *panel_opt;
            } else {
                bool found = false;
                for (std::size_t i = 0; i < s.irs.size() && !found; ++i)
                    if (s.irs[i].side == IrsSide::BsSide && alloc.elements[i] > 0) {
                        panel = i;
                        found = true;
                    }
                if (!found) throw std::runtime_error("no non-empty BS-side panel to partition");
            }

            const SearchOptions opts = search_from(args);
            const auto oracle = exhaustive_partition(s, alloc, panel, args.subsurfaces, opts, policy);
            const auto ip = statistical_partition_ip(estimated_power_curves(s, alloc, panel, args.subsurfaces));

            const auto score_of = [&](const PartitionAssignment& part) {
                const Scenario sized = apply_allocation(s, alloc);
                AssociationPlan plan;
                plan.modes = select_modes(s, alloc);
                plan.local_user = local_users(sized);
                plan.partitions[panel] = part;
                return evaluate_association(s, alloc, plan, opts);
            };
            with_output(args.out_path, [&](std::ostream& out) {
                write_partition_csv(out, {"exhaustive", "ip"}, {oracle, ip}, {score_of(oracle), score_of(ip)},
                                    args.seed);
            });
        } else if (allocate->parsed()) {
            const Scenario s = scenario_from(args.scenario_path);
            std::size_t budget = total;
            if (budget == 0)
                for (const auto& p : s.irs) budget += p.elements();

            args.partition = score_partition;
            const SearchOptions opts = search_from(args);
            const AllocationMethod m =
                method == "relax" ? AllocationMethod::RelaxAndRound : AllocationMethod::Sweep;
            const AllocationPlan plan = allocate_elements(s, budget, granularity, m, opts, policy);
            const double score = evaluate_allocation(s, plan, opts, policy);
            with_output(args.out_path,
                        [&](std::ostream& out) { write_allocation_csv(out, {method}, {plan}, {score}, args.seed); });
        }
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
