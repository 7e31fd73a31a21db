// SPDX-License-Identifier: Apache-2.0
//
// Part of irssim, a link-level simulator for reflecting-surface deployment
// studies in multi-user cells.
//
// Association: which panel serves which user.  Covers communication-mode
// selection, subsurface partition of the BS-side panel (exhaustive oracle and
// the statistical-CSI integer program), and the element-budget allocation
// across panels (grid sweep oracle and relax-and-round heuristic).

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "irssim/beamform.hpp"
#include "irssim/parallel.hpp"
#include "irssim/scenario.hpp"

namespace irssim {

/// How a user's signal reaches the BS.
enum class CommMode { Direct, UserSideSingle, BsSideSingle, HybridWithDouble };

/// Element counts per panel, in scenario panel order.
struct AllocationPlan {
    std::vector<std::size_t> elements;

    std::size_t total() const;
};

bool operator==(const AllocationPlan& a, const AllocationPlan& b);

/// Assignment of one BS-side panel's equal subsurfaces to users.  Subsurface
/// s owns the contiguous element range [s * subsurface_size, (s + 1) *
/// subsurface_size).
struct PartitionAssignment {
    std::size_t subsurfaces = 0;
    std::size_t subsurface_size = 0;
    std::vector<std::optional<std::size_t>> user;  ///< per subsurface
};

bool operator==(const PartitionAssignment& a, const PartitionAssignment& b);

/// Complete serving arrangement for one allocation.
struct AssociationPlan {
    std::vector<CommMode> modes;                         ///< per user
    std::vector<std::optional<std::size_t>> local_user;  ///< per panel; user-side panels only
    std::map<std::size_t, PartitionAssignment> partitions;  ///< per BS-side panel index
};

/// Scenario with every panel's grid resized to the allocation (near-square
/// factorization).  Throws std::invalid_argument when sizes disagree.
Scenario apply_allocation(const Scenario& s, const AllocationPlan& alloc);

/// Per-panel locally served user: the nearest user the panel covers within
/// the near-distance threshold (ties to the lower user index); meaningful for
/// user-side panels.
std::vector<std::optional<std::size_t>> local_users(const Scenario& s);

/// Communication mode of every user under the allocation: hybrid when both a
/// non-empty BS-side panel covers the user and a non-empty user-side panel
/// serves it locally, the single-reflection modes when only one of the two
/// exists, direct otherwise.
std::vector<CommMode> select_modes(const Scenario& s, const AllocationPlan& alloc);

enum class PartitionMethod { Exhaustive, StatisticalIp };
enum class AllocationMethod { Sweep, RelaxAndRound };

/// Knobs shared by the association searches.  `eval_trials` fading draws
/// (from a dedicated stream family derived from `seed`) are averaged when
/// scoring a candidate.
struct SearchOptions {
    std::size_t eval_trials = 10;
    std::uint64_t seed = 0;
    std::size_t subsurfaces = 10;  ///< requested BS-side subsurface count
    PartitionMethod partition = PartitionMethod::Exhaustive;
    BeamformOptions beamform;
};

/// Reflection blocks that realize a plan: one block per assigned subsurface
/// of each BS-side panel, one whole-panel block per serving user-side panel.
std::vector<ReflectionBlock> blocks_for_plan(const Scenario& s, const AssociationPlan& plan);

/// Mean over eval trials of the minimum user rate under the plan, with
/// reflections re-optimized per trial.  The scoring currency of all searches.
double evaluate_association(const Scenario& s, const AllocationPlan& alloc, const AssociationPlan& plan,
                            const SearchOptions& opts);

/// Exhaustive max-min partition oracle for panel `panel`: scores every
/// assignment of its `subsurfaces` equal blocks to the covered users and
/// returns the best (ties to the lexicographically smallest assignment).
/// Throws std::invalid_argument unless `subsurfaces` divides the panel's
/// element count.
PartitionAssignment exhaustive_partition(const Scenario& s, const AllocationPlan& alloc, std::size_t panel,
                                         std::size_t subsurfaces, const SearchOptions& opts,
                                         ExecPolicy policy = ExecPolicy::OpenMp);

/// Deterministic statistical-CSI power estimates feeding the integer
/// program: power[k][s] is the estimated received power of eligible user
/// users[k] when s subsurfaces serve it.
struct PowerCurves {
    std::vector<std::size_t> users;  ///< eligible users (covered by the panel)
    std::size_t subsurfaces = 0;
    std::size_t subsurface_size = 0;
    arma::mat power;  ///< users.size() x (subsurfaces + 1); rows increase in s
};

PowerCurves estimated_power_curves(const Scenario& s, const AllocationPlan& alloc, std::size_t panel,
                                   std::size_t subsurfaces);

/// Max-min integer program on statistical power curves, solved exactly by
/// enumerating subsurface-count splits.  Ties prefer giving spare subsurfaces
/// to lower-indexed users.  Requires strictly increasing rows.
PartitionAssignment statistical_partition_ip(const PowerCurves& curves);

/// Modes, local users and a partition for every non-empty BS-side panel
/// under the chosen partition method, with the requested subsurface count
/// clamped per panel to its largest divisor of the element count.
AssociationPlan build_association(const Scenario& s, const AllocationPlan& alloc, const SearchOptions& opts,
                                  ExecPolicy policy = ExecPolicy::OpenMp);

/// Splits `total` elements over the panels in multiples of `granularity`.
/// Sweep scores every split (the oracle); RelaxAndRound pattern-searches the
/// ungranular integer space, snaps to the grid and repairs locally, so it
/// evaluates far fewer candidates.  Throws std::invalid_argument unless
/// granularity >= 1 and divides total.
AllocationPlan allocate_elements(const Scenario& s, std::size_t total, std::size_t granularity,
                                 AllocationMethod method, const SearchOptions& opts,
                                 ExecPolicy policy = ExecPolicy::OpenMp);

/// Mean min-rate of an allocation under its own best association; the
/// objective allocate_elements maximizes.
double evaluate_allocation(const Scenario& s, const AllocationPlan& alloc, const SearchOptions& opts,
                           ExecPolicy policy = ExecPolicy::OpenMp);

}  // namespace irssim
