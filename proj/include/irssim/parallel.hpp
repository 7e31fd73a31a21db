// SPDX-License-Identifier: Apache-2.0
//
// Part of irssim, a link-level simulator for reflecting-surface deployment
// studies in multi-user cells.

#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace irssim {

/// Execution policy for the embarrassingly-parallel loops (Monte-Carlo
/// trials, partition candidates, allocation grid points).  Serial is the
/// reference implementation; OpenMp must produce bit-identical results
/// because every loop body writes only to its own index and all reductions
/// happen afterwards in index order.
enum class ExecPolicy { Serial, OpenMp };

template <typename Body>
void parallel_for(ExecPolicy policy, std::size_t count, const Body& body) {
    if (policy == ExecPolicy::Serial) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
#pragma omp parallel for schedule(dynamic)
    for (long long i = 0; i < static_cast<long long>(count); ++i) body(static_cast<std::size_t>(i));
}

/// Compensated (Neumaier) summation, used so that all statistics are
/// reproducible to the last bit regardless of how the work was scheduled:
/// values are accumulated strictly in index order after the parallel phase.
class CompensatedSum {
  public:
    void add(double value) {
        const double t = sum_ + value;
        if (std::abs(sum_) >= std::abs(value)) {
            comp_ += (sum_ - t) + value;
        } else {
            comp_ += (value - t) + sum_;
        }
        sum_ = t;
    }

    double value() const { return sum_ + comp_; }

  private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double compensated_total(const std::vector<double>& values) {
    CompensatedSum s;
    for (double v : values) s.add(v);
    return s.value();
}

}  // namespace irssim
