// SPDX-License-Identifier: Apache-2.0
//
// Part of irssim, a link-level simulator for reflecting-surface deployment
// studies in multi-user cells.
//
// Benchmark of the OpenMP kernels against the serial reference: the
// Monte-Carlo rate experiment and the exhaustive partition search.  Also
// verifies on the fly that both produce identical results.

#include <omp.h>

#include <cstdio>
#include <cstdlib>

#include "irssim/harness.hpp"

using namespace irssim;

namespace {

bool reports_equal(const RateReport& a, const RateReport& b) {
    return a.per_trial_rates == b.per_trial_rates && a.user_rate_mean == b.user_rate_mean &&
           a.min_rate_mean == b.min_rate_mean && a.min_rate_std == b.min_rate_std;
}

}  // namespace

int main(int argc, char** argv) {
    std::size_t trials = 60;
    if (argc > 1) trials = static_cast<std::size_t>(std::strtoull(argv[1], nullptr, 10));

    const Scenario s = default_scenario();

    ExperimentSpec spec;
    spec.label = "hybrid";
    spec.scenario = s;
    spec.allocation.elements = {300, 50, 50};
    spec.trials = trials;
    spec.seed = 42;
    spec.search.partition = PartitionMethod::StatisticalIp;  // keep setup cheap; trials dominate

    std::printf("threads available: %d\n", omp_get_max_threads());
    std::printf("%-28s %10s %10s %8s %s\n", "kernel", "serial[s]", "openmp[s]", "speedup", "match");

    {
        const double t0 = omp_get_wtime();
        const RateReport serial = run_experiment_reference(spec);
        const double t1 = omp_get_wtime();
        const RateReport parallel = run_experiment(spec, ExecPolicy::OpenMp);
        const double t2 = omp_get_wtime();
        const bool ok = reports_equal(serial, parallel);
        std::printf("%-28s %10.3f %10.3f %8.2fx %s\n", "rate experiment", t1 - t0, t2 - t1,
                    (t1 - t0) / (t2 - t1), ok ? "bit-identical" : "MISMATCH");
        if (!ok) return 1;
    }

    {
        SearchOptions opts;
        opts.eval_trials = 4;
        opts.seed = 42;
        AllocationPlan alloc;
        alloc.elements = {300, 50, 50};

        const double t0 = omp_get_wtime();
        const auto serial = exhaustive_partition(s, alloc, 0, 10, opts, ExecPolicy::Serial);
        const double t1 = omp_get_wtime();
        const auto parallel = exhaustive_partition(s, alloc, 0, 10, opts, ExecPolicy::OpenMp);
        const double t2 = omp_get_wtime();
        const bool ok = serial == parallel;
        std::printf("%-28s %10.3f %10.3f %8.2fx %s\n", "exhaustive partition", t1 - t0, t2 - t1,
                    (t1 - t0) / (t2 - t1), ok ? "identical" : "MISMATCH");
        if (!ok) return 1;
    }

    return 0;
}
