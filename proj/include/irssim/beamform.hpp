// SPDX-License-Identifier: Apache-2.0
//
// Part of irssim, a link-level simulator for reflecting-surface deployment
// studies in multi-user cells.
//
// Beamform: passive reflection optimization.  Per-element phase alignment
// against a fixed combiner, the safeguarded block-coordinate ascent over
// subsurface blocks, and the deterministic single/double-reflection power
// scaling probes.

#pragma once

#include <armadillo>
#include <complex>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "irssim/composite.hpp"

namespace irssim {

/// The scalar decomposition seen by one reflection block: with the combiner
/// fixed, the combined signal is `reference + sum_n element_gains[n] *
/// exp(i*theta_n)`.
struct CascadeGains {
    arma::cx_vec element_gains;
    std::complex<double> reference{0.0, 0.0};
};

/// Phases that co-phase every element with the reference term:
/// theta_n = arg(reference) - arg(element_gains[n]).  With a zero reference
/// the element terms are aligned onto the real axis.  The combined magnitude
/// becomes |reference| + sum_n |element_gains[n]|, the maximum possible.
arma::vec align_phases(const CascadeGains& gains);

/// |reference + sum_n element_gains[n] * exp(i*theta_n)| for arbitrary
/// phases; the quantity align_phases maximizes.
double combined_magnitude(const CascadeGains& gains, const arma::vec& theta);

/// One coordinate block of the ascent: a set of elements on one panel tuned
/// for one user.  Blocks must not overlap.  A panel's elements outside every
/// block keep their idle coefficients.
struct ReflectionBlock {
    std::size_t panel = 0;
    arma::uvec elements;
    std::size_t user = 0;
};

struct BeamformOptions {
    double tol = 1e-6;       ///< relative objective improvement per sweep
    int max_iters = 100;     ///< maximum sweeps over all blocks
    std::uint64_t idle_seed = 0;   ///< stream key for random idle phases
    std::uint64_t idle_trial = 0;  ///< trial index for random idle phases
};

struct OptimizerReport {
    int iterations = 0;    ///< sweeps executed
    bool converged = false;
    /// Objective (min received power in mW over the blocks' users) after the
    /// initial state and after every block update.  Non-decreasing by
    /// construction: an update that would lower the minimum is rejected.
    std::vector<double> objective_trajectory;
};

/// Safeguarded block-coordinate ascent on the reflection phases.  Visits the
/// BS-side blocks first, then the user-side panels; each block re-aligns its
/// elements with the current matched-filter combiner of its user and the
/// update is kept only when the objective (the minimum received power over
/// all users that own a block) does not decrease.  Runs until the per-sweep
/// relative improvement drops below `tol` or `max_iters` sweeps.
std::pair<ReflectionState, OptimizerReport> optimize_reflections(const ChannelSet& cs,
                                                                 const std::vector<ReflectionBlock>& blocks,
                                                                 const RadioConfig& radio,
                                                                 const BeamformOptions& opts = {});

/// Which cascaded path a scaling probe isolates.
enum class ScalingLink { SingleReflection, DoubleReflectionEqualSplit };

/// Fixed single-panel geometry (1 BS antenna, 1 user, all links line of
/// sight, direct path disabled) used to probe how optimized received power
/// grows with the element count.
Scenario single_reflection_toy(std::size_t n_elements);

/// Fixed two-panel geometry in which only the BS -> panel A -> panel B ->
/// user path exists; n_a + n_b elements split across the two panels.
Scenario double_reflection_toy(std::size_t n_a, std::size_t n_b);

/// Optimized received power (mW) on the corresponding toy geometry with
/// `n_elements` total elements; DoubleReflectionEqualSplit puts n/2 on each
/// panel and throws std::invalid_argument for odd n.  Deterministic: the toys
/// have no fading.
double received_power_scaling(std::size_t n_elements, ScalingLink kind);

}  // namespace irssim
