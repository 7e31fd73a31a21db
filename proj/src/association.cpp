// SPDX-License-Identifier: Apache-2.0
//
// Part of irssim, a link-level simulator for reflecting-surface deployment
// studies in multi-user cells.

#include "irssim/association.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <tuple>

namespace irssim {

namespace {

/// Salt separating the candidate-scoring fading draws from the reported
/// Monte-Carlo trials, so a search never sees the trials it is judged on.
constexpr std::uint64_t kEvalSalt = 0x5eedfacecafef00dULL;

std::uint64_t eval_master_seed(std::uint64_t seed) { return mix64(seed ^ kEvalSalt); }

/// Mean over the drawn sets of the minimum user rate, with reflections
/// re-optimized per set.  The common scoring core of every search.
double mean_min_rate(const Scenario& s, const std::vector<ReflectionBlock>& blocks,
                     const std::vector<ChannelSet>& sets, const SearchOptions& opts, std::uint64_t eval_master) {
    if (s.users.empty()) throw std::invalid_argument("scoring needs at least one user");
    CompensatedSum acc;
    for (std::size_t t = 0; t < sets.size(); ++t) {
        BeamformOptions bf = opts.beamform;
        bf.idle_seed = eval_master;
        bf.idle_trial = t;
        const auto [rs, report] = optimize_reflections(sets[t], blocks, s.radio, bf);
        (void)report;
        double worst = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < s.users.size(); ++k) {
            const auto h = effective_channel(sets[t], rs, k);
            worst = std::min(worst, rate_bps_hz(mrc_snr(h.total, s.radio)));
        }
        acc.add(worst);
    }
    return acc.value() / static_cast<double>(sets.size());
}

std::vector<ChannelSet> draw_eval_sets(const Scenario& s, const SearchOptions& opts) {
    if (opts.eval_trials == 0) throw std::invalid_argument("eval_trials must be at least 1");
    const std::uint64_t master = eval_master_seed(opts.seed);
    std::vector<ChannelSet> sets;
    sets.reserve(opts.eval_trials);
    for (std::size_t t = 0; t < opts.eval_trials; ++t) sets.push_back(build_channel_set(s, master, t));
    return sets;
}

/// Largest subsurface count <= requested that divides the element count.
std::size_t clamp_subsurfaces(std::size_t requested, std::size_t n_elements) {
    if (requested == 0) throw std::invalid_argument("subsurface count must be at least 1");
    for (std::size_t d = std::min(requested, n_elements); d >= 1; --d)
        if (n_elements % d == 0) return d;
    return 1;
}

void check_partition_target(const Scenario& s, std::size_t panel, std::size_t subsurfaces) {
    if (panel >= s.irs.size()) throw std::invalid_argument("partition: panel index out of range");
    if (s.irs[panel].side != IrsSide::BsSide)
        throw std::invalid_argument("partition targets a BS-side panel");
    if (subsurfaces == 0) throw std::invalid_argument("partition needs at least one subsurface");
    if (s.irs[panel].elements() % subsurfaces != 0)
        throw std::invalid_argument("subsurface count " + std::to_string(subsurfaces) +
                                    " does not divide the panel's " + std::to_string(s.irs[panel].elements()) +
                                    " elements");
}

std::vector<std::size_t> eligible_users(const Scenario& s, std::size_t panel) {
    std::vector<std::size_t> out;
    if (s.irs[panel].elements() == 0) return out;
    for (std::size_t k = 0; k < s.users.size(); ++k)
        if (covers(s.irs[panel], s.users[k].position)) out.push_back(k);
    return out;
}

}  // namespace

std::size_t AllocationPlan::total() const {
    std::size_t sum = 0;
    for (std::size_t n : elements) sum += n;
    return sum;
}

bool operator==(const AllocationPlan& a, const AllocationPlan& b) { return a.elements == b.elements; }

bool operator==(const PartitionAssignment& a, const PartitionAssignment& b) {
    return a.subsurfaces == b.subsurfaces && a.subsurface_size == b.subsurface_size && a.user == b.user;
}

Scenario apply_allocation(const Scenario& s, const AllocationPlan& alloc) {
    if (alloc.elements.size() != s.irs.size())
        throw std::invalid_argument("allocation covers " + std::to_string(alloc.elements.size()) +
                                    " panels, scenario has " + std::to_string(s.irs.size()));
    Scenario out = s;
    for (std::size_t i = 0; i < out.irs.size(); ++i)
        std::tie(out.irs[i].rows, out.irs[i].cols) = grid_for(alloc.elements[i]);
    return out;
}

std::vector<std::optional<std::size_t>> local_users(const Scenario& s) {
    std::vector<std::optional<std::size_t>> out(s.irs.size());
    for (std::size_t j = 0; j < s.irs.size(); ++j) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < s.users.size(); ++k) {
            if (!covers(s.irs[j], s.users[k].position)) continue;
            const double d = distance(s.irs[j].position, s.users[k].position);
            if (d > s.radio.near_threshold_m) continue;
            if (d < best) {
                best = d;
                out[j] = k;
            }
        }
    }
    return out;
}

std::vector<CommMode> select_modes(const Scenario& s, const AllocationPlan& alloc) {
    const Scenario sized = apply_allocation(s, alloc);
    const auto locals = local_users(sized);

    std::vector<CommMode> modes(sized.users.size(), CommMode::Direct);
    for (std::size_t k = 0; k < sized.users.size(); ++k) {
        bool bs_cov = false;
        for (std::size_t i = 0; i < sized.irs.size(); ++i)
            if (sized.irs[i].side == IrsSide::BsSide && sized.irs[i].elements() > 0 &&
                covers(sized.irs[i], sized.users[k].position))
                bs_cov = true;
        bool us_cov = false;
        for (std::size_t j = 0; j < sized.irs.size(); ++j)
            if (sized.irs[j].side == IrsSide::UserSide && sized.irs[j].elements() > 0 && locals[j] == k)
                us_cov = true;
        if (bs_cov && us_cov) modes[k] = CommMode::HybridWithDouble;
        else if (bs_cov) modes[k] = CommMode::BsSideSingle;
        else if (us_cov) modes[k] = CommMode::UserSideSingle;
    }
    return modes;
}

std::vector<ReflectionBlock> blocks_for_plan(const Scenario& s, const AssociationPlan& plan) {
    if (plan.modes.size() != s.users.size() || plan.local_user.size() != s.irs.size())
        throw std::invalid_argument("blocks_for_plan: plan does not match the scenario");

    std::vector<ReflectionBlock> blocks;
    for (const auto& [panel, part] : plan.partitions) {
        if (panel >= s.irs.size()) throw std::invalid_argument("blocks_for_plan: partition panel out of range");
        if (part.subsurfaces * part.subsurface_size != s.irs[panel].elements())
            throw std::invalid_argument("blocks_for_plan: partition does not tile panel " + std::to_string(panel));
        for (std::size_t sub = 0; sub < part.subsurfaces; ++sub) {
            if (!part.user[sub]) continue;
            const arma::uword lo = static_cast<arma::uword>(sub * part.subsurface_size);
            const arma::uword hi = static_cast<arma::uword>((sub + 1) * part.subsurface_size) - 1;
            blocks.push_back({panel, arma::regspace<arma::uvec>(lo, hi), *part.user[sub]});
        }
    }
    for (std::size_t j = 0; j < s.irs.size(); ++j) {
        if (s.irs[j].side != IrsSide::UserSide || s.irs[j].elements() == 0) continue;
        if (!plan.local_user[j]) continue;
        const std::size_t k = *plan.local_user[j];
        if (plan.modes[k] != CommMode::UserSideSingle && plan.modes[k] != CommMode::HybridWithDouble) continue;
        blocks.push_back(
            {j, arma::regspace<arma::uvec>(0, static_cast<arma::uword>(s.irs[j].elements()) - 1), k});
    }
    return blocks;
}

double evaluate_association(const Scenario& s, const AllocationPlan& alloc, const AssociationPlan& plan,
                            const SearchOptions& opts) {
    const Scenario sized = apply_allocation(s, alloc);
    const auto blocks = blocks_for_plan(sized, plan);
    const auto sets = draw_eval_sets(sized, opts);
    return mean_min_rate(sized, blocks, sets, opts, eval_master_seed(opts.seed));
}

PartitionAssignment exhaustive_partition(const Scenario& s, const AllocationPlan& alloc, std::size_t panel,
                                         std::size_t subsurfaces, const SearchOptions& opts, ExecPolicy policy) {
    const Scenario sized = apply_allocation(s, alloc);
    check_partition_target(sized, panel, subsurfaces);
    const std::size_t size = sized.irs[panel].elements() / subsurfaces;

    PartitionAssignment best{subsurfaces, size, std::vector<std::optional<std::size_t>>(subsurfaces)};
    const auto eligible = eligible_users(sized, panel);
    if (eligible.empty()) return best;

    // Base plan: modes and local users fixed, other BS-side panels idle.
    AssociationPlan plan;
    plan.modes = select_modes(s, alloc);
    plan.local_user = local_users(sized);

    std::size_t n_candidates = 1;
    for (std::size_t sub = 0; sub < subsurfaces; ++sub) {
        if (n_candidates > 10'000'000 / eligible.size())
            throw std::invalid_argument("exhaustive partition: search space too large");
        n_candidates *= eligible.size();
    }

    const auto sets = draw_eval_sets(sized, opts);
    const std::uint64_t eval_master = eval_master_seed(opts.seed);

    std::vector<double> scores(n_candidates);
    parallel_for(policy, n_candidates, [&](std::size_t c) {
        AssociationPlan cand = plan;
        PartitionAssignment part{subsurfaces, size, std::vector<std::optional<std::size_t>>(subsurfaces)};
        // Mixed-radix decode with subsurface 0 as the most significant digit,
        // so candidate index order is assignment lexicographic order.
        std::size_t rem = c;
        for (std::size_t sub = subsurfaces; sub-- > 0;) {
            part.user[sub] = eligible[rem % eligible.size()];
            rem /= eligible.size();
        }
        cand.partitions[panel] = std::move(part);
        scores[c] = mean_min_rate(sized, blocks_for_plan(sized, cand), sets, opts, eval_master);
    });

    std::size_t best_c = 0;
    for (std::size_t c = 1; c < n_candidates; ++c)
        if (scores[c] > scores[best_c]) best_c = c;

    std::size_t rem = best_c;
    for (std::size_t sub = subsurfaces; sub-- > 0;) {
        best.user[sub] = eligible[rem % eligible.size()];
        rem /= eligible.size();
    }
    return best;
}

PowerCurves estimated_power_curves(const Scenario& s, const AllocationPlan& alloc, std::size_t panel,
                                   std::size_t subsurfaces) {
    const Scenario sized = apply_allocation(s, alloc);
    check_partition_target(sized, panel, subsurfaces);

    PowerCurves curves;
    curves.users = eligible_users(sized, panel);
    curves.subsurfaces = subsurfaces;
    curves.subsurface_size = sized.irs[panel].elements() / subsurfaces;

    const double p_mw = db_to_linear(sized.radio.tx_power_dbm);
    const double m = static_cast<double>(sized.bs.antennas);
    const double ref = sized.radio.path_gain_ref_db;

    const auto bs_model = classify_link(sized, NodeRef::irs(panel), NodeRef::bs());
    const double amp_bs = db_to_amplitude(
        path_gain_db(distance(sized.irs[panel].position, sized.bs.position), bs_model.path_loss_exponent, ref));

    curves.power.set_size(curves.users.size(), subsurfaces + 1);
    for (std::size_t e = 0; e < curves.users.size(); ++e) {
        const std::size_t k = curves.users[e];
        const auto user_model = classify_link(sized, NodeRef::user(k), NodeRef::irs(panel));
        const double amp_user = db_to_amplitude(path_gain_db(
            distance(sized.users[k].position, sized.irs[panel].position), user_model.path_loss_exponent, ref));
        double direct_gain = 0.0;
        if (sized.links.direct) {
            const auto direct_model = classify_link(sized, NodeRef::user(k), NodeRef::bs());
            direct_gain = db_to_linear(
                path_gain_db(distance(sized.users[k].position, sized.bs.position), direct_model.path_loss_exponent,
                             ref));
        }
        for (std::size_t c = 0; c <= subsurfaces; ++c) {
            const double coherent = static_cast<double>(c * curves.subsurface_size) * amp_bs * amp_user;
            curves.power(e, c) = p_mw * m * (direct_gain + coherent * coherent);
        }
    }
    return curves;
}

PartitionAssignment statistical_partition_ip(const PowerCurves& curves) {
    PartitionAssignment out{curves.subsurfaces, curves.subsurface_size,
                            std::vector<std::optional<std::size_t>>(curves.subsurfaces)};
    const std::size_t n_users = curves.users.size();
    if (n_users == 0) return out;

    if (curves.power.n_rows != n_users || curves.power.n_cols != curves.subsurfaces + 1)
        throw std::invalid_argument("statistical_partition_ip: power matrix shape mismatch");
    for (std::size_t e = 0; e < n_users; ++e)
        for (std::size_t c = 1; c <= curves.subsurfaces; ++c)
            if (!(curves.power(e, c) > curves.power(e, c - 1)))
                throw std::invalid_argument("statistical_partition_ip: power curves must be strictly increasing");

    // Exact max-min over all ways of splitting the subsurface count.  The
    // counts are enumerated lexicographically descending, so on a tie the
    // first (larger-counts-first) solution stands and spare subsurfaces go to
    // lower-indexed users.
    std::vector<std::size_t> counts(n_users, 0);
    std::vector<std::size_t> best_counts;
    double best_score = -1.0;

    const auto score_of = [&](const std::vector<std::size_t>& c) {
        double worst = std::numeric_limits<double>::infinity();
        for (std::size_t e = 0; e < n_users; ++e) worst = std::min(worst, curves.power(e, c[e]));
        return worst;
    };

    const auto recurse = [&](const auto& self, std::size_t user, std::size_t left) -> void {
        if (user + 1 == n_users) {
            counts[user] = left;
            const double sc = score_of(counts);
            if (sc > best_score) {
                best_score = sc;
                best_counts = counts;
            }
            return;
        }
        for (std::size_t give = left + 1; give-- > 0;) {
            counts[user] = give;
            self(self, user + 1, left - give);
        }
    };
    recurse(recurse, 0, curves.subsurfaces);

    std::size_t sub = 0;
    for (std::size_t e = 0; e < n_users; ++e)
        for (std::size_t c = 0; c < best_counts[e]; ++c) out.user[sub++] = curves.users[e];
    return out;
}

AssociationPlan build_association(const Scenario& s, const AllocationPlan& alloc, const SearchOptions& opts,
                                  ExecPolicy policy) {
    const Scenario sized = apply_allocation(s, alloc);
    AssociationPlan plan;
    plan.modes = select_modes(s, alloc);
    plan.local_user = local_users(sized);
    for (std::size_t i = 0; i < sized.irs.size(); ++i) {
        if (sized.irs[i].side != IrsSide::BsSide || sized.irs[i].elements() == 0) continue;
        const std::size_t subs = clamp_subsurfaces(opts.subsurfaces, sized.irs[i].elements());
        plan.partitions[i] = opts.partition == PartitionMethod::Exhaustive
                                 ? exhaustive_partition(s, alloc, i, subs, opts, policy)
                                 : statistical_partition_ip(estimated_power_curves(s, alloc, i, subs));
    }
    return plan;
}

double evaluate_allocation(const Scenario& s, const AllocationPlan& alloc, const SearchOptions& opts,
                           ExecPolicy policy) {
    const AssociationPlan plan = build_association(s, alloc, opts, policy);
    return evaluate_association(s, alloc, plan, opts);
}

namespace {

/// Ascending-lexicographic enumeration of all splits of `units` over `parts`.
void compositions(std::size_t units, std::size_t parts, std::vector<std::size_t>& prefix,
                  std::vector<std::vector<std::size_t>>& out) {
    if (parts == 1) {
        prefix.push_back(units);
        out.push_back(prefix);
        prefix.pop_back();
        return;
    }
    for (std::size_t first = 0; first <= units; ++first) {
        prefix.push_back(first);
        compositions(units - first, parts - 1, prefix, out);
        prefix.pop_back();
    }
}

/// Largest-remainder rounding of an integer vector onto multiples of g with
/// a fixed total.
std::vector<std::size_t> snap_to_grid(const std::vector<std::size_t>& x, std::size_t g, std::size_t total) {
    const std::size_t units = total / g;
    std::vector<std::size_t> base(x.size());
    std::vector<std::pair<double, std::size_t>> frac(x.size());
    std::size_t used = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        base[i] = x[i] / g;
        used += base[i];
        frac[i] = {static_cast<double>(x[i] % g) / static_cast<double>(g), i};
    }
    // Hand the leftover units to the largest fractional parts, ties to the
    // lower index.
    std::stable_sort(frac.begin(), frac.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t r = 0; used < units && r < frac.size(); ++r) {
        ++base[frac[r].second];
        ++used;
    }
    // Degenerate case: rounding overshot (possible only if x summed above
    // total); trim from the end.
    for (std::size_t i = base.size(); used > units && i-- > 0;) {
        const std::size_t trim = std::min(base[i], used - units);
        base[i] -= trim;
        used -= trim;
    }
    std::vector<std::size_t> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = base[i] * g;
    return out;
}

}  // namespace

AllocationPlan allocate_elements(const Scenario& s, std::size_t total, std::size_t granularity,
                                 AllocationMethod method, const SearchOptions& opts, ExecPolicy policy) {
    if (granularity == 0) throw std::invalid_argument("granularity must be at least 1");
    if (total % granularity != 0) throw std::invalid_argument("granularity must divide the element budget");
    const std::size_t n_panels = s.irs.size();
    if (n_panels == 0) {
        if (total != 0) throw std::invalid_argument("cannot allocate elements without panels");
        return {};
    }

    if (method == AllocationMethod::Sweep) {
        std::vector<std::vector<std::size_t>> units;
        std::vector<std::size_t> prefix;
        compositions(total / granularity, n_panels, prefix, units);

        std::vector<double> scores(units.size());
        parallel_for(policy, units.size(), [&](std::size_t c) {
            AllocationPlan cand;
            cand.elements.resize(n_panels);
            for (std::size_t i = 0; i < n_panels; ++i) cand.elements[i] = units[c][i] * granularity;
            // Candidates already run in parallel; keep the inner search serial.
            scores[c] = evaluate_allocation(s, cand, opts, ExecPolicy::Serial);
        });

        std::size_t best = 0;
        for (std::size_t c = 1; c < units.size(); ++c)
            if (scores[c] > scores[best]) best = c;

        AllocationPlan out;
        out.elements.resize(n_panels);
        for (std::size_t i = 0; i < n_panels; ++i) out.elements[i] = units[best][i] * granularity;
        return out;
    }

    // RelaxAndRound: pattern search on ungranular integer counts, then snap
    // to the grid and repair with single-unit swaps.
    std::map<std::vector<std::size_t>, double> cache;
    const auto score = [&](const std::vector<std::size_t>& x) {
        const auto it = cache.find(x);
        if (it != cache.end()) return it->second;
        AllocationPlan cand;
        cand.elements = x;
        const double sc = evaluate_allocation(s, cand, opts, policy);
        cache.emplace(x, sc);
        return sc;
    };

    std::vector<std::size_t> x(n_panels, total / n_panels);
    for (std::size_t i = 0; i < total % n_panels; ++i) ++x[i];

    double current = score(x);
    for (std::size_t step = std::max<std::size_t>(total / 4, 1); step >= 1; step /= 2) {
        bool improved = true;
        while (improved) {
            improved = false;
            std::vector<std::size_t> best_cand;
            double best_sc = current;
            for (std::size_t i = 0; i < n_panels; ++i) {
                if (x[i] < step) continue;
                for (std::size_t j = 0; j < n_panels; ++j) {
                    if (i == j) continue;
                    auto cand = x;
                    cand[i] -= step;
                    cand[j] += step;
                    const double sc = score(cand);
                    if (sc > best_sc) {
                        best_sc = sc;
                        best_cand = std::move(cand);
                    }
                }
            }
            if (!best_cand.empty()) {
                x = std::move(best_cand);
                current = best_sc;
                improved = true;
            }
        }
        if (step == 1) break;
    }

    x = snap_to_grid(x, granularity, total);
    double best_sc = score(x);
    bool improved = true;
    while (improved) {
        improved = false;
        for (std::size_t i = 0; i < n_panels && !improved; ++i) {
            if (x[i] < granularity) continue;
            for (std::size_t j = 0; j < n_panels && !improved; ++j) {
                if (i == j) continue;
                auto cand = x;
                cand[i] -= granularity;
                cand[j] += granularity;
                const double sc = score(cand);
                if (sc > best_sc) {
                    best_sc = sc;
                    x = std::move(cand);
                    improved = true;
                }
            }
        }
    }

    AllocationPlan out;
    out.elements = x;
    return out;
}

}  // namespace irssim
