// SPDX-License-Identifier: Apache-2.0
//
// Part of irssim, a link-level simulator for reflecting-surface deployment
// studies in multi-user cells.
//
// Block-coordinate ascent over reflection phases.  Per-user channels are
// maintained incrementally: a block update touching elements E changes user
// m's channel by  sum_{n in E} c_n^m (phi_new_n - phi_old_n),  where c_n^m is
// the cascade column of element n toward user m.  The per-path factorizations
// below evaluate those deltas without ever forming an M x N_i x N_j tensor.

#include "irssim/beamform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <tuple>

namespace irssim {

arma::vec align_phases(const CascadeGains& gains) {
    const double ref_phase = std::abs(gains.reference) > 0.0 ? std::arg(gains.reference) : 0.0;
    arma::vec theta(gains.element_gains.n_elem);
    for (arma::uword n = 0; n < gains.element_gains.n_elem; ++n)
        theta(n) = ref_phase - std::arg(gains.element_gains(n));
    return theta;
}

double combined_magnitude(const CascadeGains& gains, const arma::vec& theta) {
    if (theta.n_elem != gains.element_gains.n_elem)
        throw std::invalid_argument("combined_magnitude: phase/gain length mismatch");
    std::complex<double> sum = gains.reference;
    for (arma::uword n = 0; n < theta.n_elem; ++n) sum += gains.element_gains(n) * std::polar(1.0, theta(n));
    return std::abs(sum);
}

namespace {

/// Cache of the inner double-reflection products y[i][j][m] =
/// irs_irs[i][j] * (phi_j % irs_user[j][m]); refreshed incrementally when a
/// user-side block commits.
class ThroughCache {
  public:
    ThroughCache(const ChannelSet& cs, const ReflectionState& rs) : cs_(cs), rs_(rs) {
        const std::size_t n_irs = cs.elements.size();
        y_.assign(n_irs, std::vector<std::vector<arma::cx_vec>>(n_irs, std::vector<arma::cx_vec>(cs.n_users)));
        valid_.assign(n_irs, std::vector<std::vector<bool>>(n_irs, std::vector<bool>(cs.n_users, false)));
    }

    const arma::cx_vec& get(std::size_t i, std::size_t j, std::size_t m) {
        if (!valid_[i][j][m]) {
            y_[i][j][m] = cs_.irs_irs[i][j] * (rs_.coeffs[j] % cs_.irs_user[j][m]);
            valid_[i][j][m] = true;
        }
        return y_[i][j][m];
    }

    /// Applies a committed phase delta on panel j: y += S.cols(E) * d, with
    /// d = delta_phi % r_jm restricted to E.  Untouched (invalid) entries
    /// stay lazy.
    void shift(std::size_t i, std::size_t j, std::size_t m, const arma::cx_vec& delta) {
        if (valid_[i][j][m]) y_[i][j][m] += delta;
    }

    bool is_valid(std::size_t i, std::size_t j, std::size_t m) const { return valid_[i][j][m]; }

  private:
    const ChannelSet& cs_;
    const ReflectionState& rs_;
    std::vector<std::vector<std::vector<arma::cx_vec>>> y_;
    std::vector<std::vector<std::vector<bool>>> valid_;
};

struct AscentState {
    std::vector<std::size_t> users;    ///< ascending, unique
    std::vector<arma::cx_vec> h;       ///< current channel per users[] entry
    std::vector<double> power_mw;      ///< P * ||h||^2
    double objective = 0.0;            ///< min over power_mw
};

std::size_t user_slot(const std::vector<std::size_t>& users, std::size_t user) {
    return static_cast<std::size_t>(std::lower_bound(users.begin(), users.end(), user) - users.begin());
}

void validate_blocks(const ChannelSet& cs, const std::vector<ReflectionBlock>& blocks) {
    std::vector<std::vector<std::uint8_t>> owned(cs.elements.size());
    for (std::size_t i = 0; i < cs.elements.size(); ++i) owned[i].assign(cs.elements[i], 0);
    for (const auto& b : blocks) {
        if (b.panel >= cs.elements.size()) throw std::invalid_argument("reflection block: panel index out of range");
        if (b.user >= cs.n_users) throw std::invalid_argument("reflection block: user index out of range");
        for (arma::uword e = 0; e < b.elements.n_elem; ++e) {
            const arma::uword n = b.elements(e);
            if (n >= cs.elements[b.panel])
                throw std::invalid_argument("reflection block: element index out of range on panel " +
                                            std::to_string(b.panel));
            if (owned[b.panel][n]++)
                throw std::invalid_argument("reflection blocks overlap on panel " + std::to_string(b.panel));
        }
    }
}

}  // namespace

std::pair<ReflectionState, OptimizerReport> optimize_reflections(const ChannelSet& cs,
                                                                 const std::vector<ReflectionBlock>& blocks,
                                                                 const RadioConfig& radio,
                                                                 const BeamformOptions& opts) {
    validate_blocks(cs, blocks);

    ReflectionState rs = zero_phase_state(cs);

    // Idle elements -- everything no block owns -- follow the idle policy.
    if (radio.idle_policy == IdlePolicy::RandomPhase) {
        std::vector<std::vector<std::uint8_t>> owned(cs.elements.size());
        for (std::size_t i = 0; i < cs.elements.size(); ++i) owned[i].assign(cs.elements[i], 0);
        for (const auto& b : blocks)
            for (arma::uword e = 0; e < b.elements.n_elem; ++e) owned[b.panel][b.elements(e)] = 1;
        for (std::size_t i = 0; i < cs.elements.size(); ++i) {
            StreamRng rng(opts.idle_seed, StreamTag{opts.idle_trial, stream_kind::idle,
                                                    static_cast<std::uint32_t>(i), 0});
            for (std::size_t n = 0; n < cs.elements[i]; ++n)
                if (!owned[i][n]) rs.coeffs[i](n) = std::polar(1.0, rng.phase());
        }
    }

    OptimizerReport report;
    report.converged = true;
    if (blocks.empty()) return {std::move(rs), std::move(report)};

    // BS-side subsurfaces sweep first, then the user-side panels; within a
    // side, panel then element order.  Deterministic regardless of caller
    // ordering.
    std::vector<std::size_t> order(blocks.size());
    for (std::size_t b = 0; b < blocks.size(); ++b) order[b] = b;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t lhs, std::size_t rhs) {
        const auto key = [&](std::size_t idx) {
            const auto& blk = blocks[idx];
            const arma::uword first = blk.elements.n_elem > 0 ? blk.elements.min() : 0;
            return std::tuple<int, std::size_t, arma::uword>(cs.side[blk.panel] == IrsSide::BsSide ? 0 : 1,
                                                             blk.panel, first);
        };
        return key(lhs) < key(rhs);
    });

    AscentState st;
    for (const auto& b : blocks) st.users.push_back(b.user);
    std::sort(st.users.begin(), st.users.end());
    st.users.erase(std::unique(st.users.begin(), st.users.end()), st.users.end());

    const double p_mw = db_to_linear(radio.tx_power_dbm);
    st.h.resize(st.users.size());
    st.power_mw.resize(st.users.size());
    for (std::size_t u = 0; u < st.users.size(); ++u) {
        st.h[u] = effective_channel(cs, rs, st.users[u]).total;
        st.power_mw[u] = p_mw * std::real(arma::cdot(st.h[u], st.h[u]));
    }
    st.objective = *std::min_element(st.power_mw.begin(), st.power_mw.end());
    report.objective_trajectory.push_back(st.objective);

    ThroughCache through(cs, rs);
    report.converged = false;

    for (int sweep = 0; sweep < opts.max_iters; ++sweep) {
        const double sweep_start = st.objective;

        for (const std::size_t bi : order) {
            const ReflectionBlock& blk = blocks[bi];
            const std::size_t i = blk.panel;
            const arma::uvec& e = blk.elements;

            const bool bs_block = cs.side[i] == IrsSide::BsSide;
            // Skip blocks with no active path toward their own user.
            bool alive = e.n_elem > 0;
            if (alive && bs_block) {
                bool reach = cs.toggles.single && cs.user_mask[i][blk.user];
                if (!reach && cs.toggles.double_reflection)
                    for (std::size_t j = 0; j < cs.elements.size() && !reach; ++j)
                        reach = cs.pair_mask[i][j] && cs.user_mask[j][blk.user];
                alive = cs.bs_mask[i] && reach;
            } else if (alive) {
                bool reach = cs.toggles.single && cs.bs_mask[i];
                if (!reach && cs.toggles.double_reflection)
                    for (std::size_t b = 0; b < cs.elements.size() && !reach; ++b)
                        reach = cs.pair_mask[b][i] && cs.bs_mask[b];
                alive = cs.user_mask[i][blk.user] && reach;
            }
            if (!alive) {
                report.objective_trajectory.push_back(st.objective);
                continue;
            }

            const std::size_t k_slot = user_slot(st.users, blk.user);

            // Matched-filter combiner for the block's user.
            arma::cx_vec w;
            const double hk_norm = std::sqrt(std::real(arma::cdot(st.h[k_slot], st.h[k_slot])));
            if (hk_norm > 0.0) {
                w = st.h[k_slot] / hk_norm;
            } else {
                w.zeros(cs.bs_antennas);
                w(0) = 1.0;
            }

            const arma::cx_vec phi_old = rs.coeffs[i].elem(e);
            arma::cx_vec gains;                       // a_n = w^H c_n^k for n in E
            std::vector<arma::cx_vec> base;           // BS-side: per-user scalar cascade factors on E
            std::vector<arma::cx_vec> delta_r;        // user-side: per-user (delta_phi % r_im)|E, filled later
            arma::cx_mat g_cols;

            if (bs_block) {
                g_cols = cs.bs_irs[i].cols(e);  // M x |E|
                base.resize(st.users.size());
                for (std::size_t u = 0; u < st.users.size(); ++u) {
                    const std::size_t m = st.users[u];
                    arma::cx_vec bm(e.n_elem, arma::fill::zeros);
                    if (cs.toggles.single && cs.user_mask[i][m]) bm += cs.irs_user[i][m].elem(e);
                    if (cs.toggles.double_reflection)
                        for (std::size_t j = 0; j < cs.elements.size(); ++j)
                            if (cs.pair_mask[i][j] && cs.user_mask[j][m]) bm += through.get(i, j, m).elem(e);
                    base[u] = std::move(bm);
                }
                const arma::cx_vec ge_w = g_cols.t() * w;  // (G_E)^H w
                gains = arma::conj(ge_w) % base[k_slot];
            } else {
                // User-side panel: single path through this panel plus the
                // double paths arriving via every facing BS-side panel b:
                //   c_n^m = [G_i[:,n] + sum_b (G_b diag(phi_b) S_bi)[:,n]] r_im[n].
                if (cs.bs_mask[i]) g_cols = cs.bs_irs[i].cols(e);
                arma::cx_vec front(e.n_elem, arma::fill::zeros);  // w^H (...)[:,n] on E
                if (cs.toggles.single && cs.bs_mask[i]) front += arma::conj(arma::cx_vec(g_cols.t() * w));
                if (cs.toggles.double_reflection)
                    for (std::size_t b = 0; b < cs.elements.size(); ++b) {
                        if (!cs.pair_mask[b][i] || !cs.bs_mask[b]) continue;
                        const arma::cx_vec vb = cs.bs_irs[b].t() * w;  // N_b
                        const arma::cx_vec wh_through =
                            cs.irs_irs[b][i].st() * (rs.coeffs[b] % arma::conj(vb));  // N_i
                        front += wh_through.elem(e);
                    }
                gains = front % cs.irs_user[i][blk.user].elem(e);
            }

            const std::complex<double> reference =
                arma::cdot(w, st.h[k_slot]) - arma::accu(gains % phi_old);
            const arma::vec theta = align_phases({gains, reference});
            arma::cx_vec phi_new(e.n_elem);
            for (arma::uword n = 0; n < e.n_elem; ++n) phi_new(n) = std::polar(1.0, theta(n));
            const arma::cx_vec delta_phi = phi_new - phi_old;

            // Channel deltas for every tracked user, then the safeguard: the
            // update is kept only if the worst user does not get worse.
            std::vector<arma::cx_vec> delta_h(st.users.size());
            if (bs_block) {
                for (std::size_t u = 0; u < st.users.size(); ++u) delta_h[u] = g_cols * (delta_phi % base[u]);
            } else {
                delta_r.resize(st.users.size());
                for (std::size_t u = 0; u < st.users.size(); ++u) {
                    const std::size_t m = st.users[u];
                    arma::cx_vec dh(cs.bs_antennas, arma::fill::zeros);
                    if (cs.user_mask[i][m]) {
                        delta_r[u] = delta_phi % cs.irs_user[i][m].elem(e);
                        if (cs.toggles.single && cs.bs_mask[i]) dh += g_cols * delta_r[u];
                        if (cs.toggles.double_reflection)
                            for (std::size_t b = 0; b < cs.elements.size(); ++b) {
                                if (!cs.pair_mask[b][i] || !cs.bs_mask[b]) continue;
                                dh += cs.bs_irs[b] * (rs.coeffs[b] % (cs.irs_irs[b][i].cols(e) * delta_r[u]));
                            }
                    }
                    delta_h[u] = std::move(dh);
                }
            }

            std::vector<double> cand_power(st.users.size());
            double cand_obj = std::numeric_limits<double>::infinity();
            std::vector<arma::cx_vec> cand_h(st.users.size());
            for (std::size_t u = 0; u < st.users.size(); ++u) {
                cand_h[u] = st.h[u] + delta_h[u];
                cand_power[u] = p_mw * std::real(arma::cdot(cand_h[u], cand_h[u]));
                cand_obj = std::min(cand_obj, cand_power[u]);
            }

            if (cand_obj >= st.objective) {
                rs.coeffs[i].elem(e) = phi_new;
                st.h = std::move(cand_h);
                st.power_mw = std::move(cand_power);
                st.objective = cand_obj;
                if (!bs_block && cs.toggles.double_reflection) {
                    // Keep the cached double-reflection inner products in
                    // step with the committed phases.
                    for (std::size_t b = 0; b < cs.elements.size(); ++b) {
                        if (!cs.pair_mask[b][i]) continue;
                        for (std::size_t u = 0; u < st.users.size(); ++u) {
                            const std::size_t m = st.users[u];
                            if (!cs.user_mask[i][m] || !through.is_valid(b, i, m)) continue;
                            through.shift(b, i, m, cs.irs_irs[b][i].cols(e) * delta_r[u]);
                        }
                    }
                }
            }
            report.objective_trajectory.push_back(st.objective);
        }

        ++report.iterations;
        const double gain = st.objective - sweep_start;
        if (gain <= opts.tol * std::max(sweep_start, 1e-300)) {
            report.converged = true;
            break;
        }
    }

    return {std::move(rs), std::move(report)};
}

Scenario single_reflection_toy(std::size_t n_elements) {
    if (n_elements == 0) throw std::invalid_argument("single_reflection_toy: need at least one element");
    Scenario s;
    s.bs.position = {0.0, 0.0, 0.0};
    s.bs.antennas = 1;
    s.users = {User{{100.0, 0.0, 0.0}}};

    IrsPanel panel;
    panel.position = {10.0, 10.0, 0.0};
    panel.normal = normalized({0.2, -1.0, 0.0});  // faces both the BS and the user
    panel.side = IrsSide::BsSide;
    const auto [rows, cols] = grid_for(n_elements);
    panel.rows = rows;
    panel.cols = cols;
    s.irs = {panel};

    s.radio.near_threshold_m = 1e9;  // every hop is line of sight
    s.links.direct = false;
    s.links.single = true;
    s.links.double_reflection = false;
    return s;
}

Scenario double_reflection_toy(std::size_t n_a, std::size_t n_b) {
    if (n_a == 0 || n_b == 0) throw std::invalid_argument("double_reflection_toy: both panels need elements");
    Scenario s;
    s.bs.position = {0.0, 0.0, 0.0};
    s.bs.antennas = 1;
    s.users = {User{{100.0, 0.0, 0.0}}};

    IrsPanel a;  // near the BS, faces the BS and panel b
    a.position = {10.0, 10.0, 0.0};
    a.normal = normalized({0.2, -1.0, 0.0});
    a.side = IrsSide::BsSide;
    std::tie(a.rows, a.cols) = grid_for(n_a);

    IrsPanel b;  // near the user, faces the user and panel a
    b.position = {90.0, 8.0, 0.0};
    b.normal = normalized({-0.2, -1.0, 0.0});
    b.side = IrsSide::UserSide;
    std::tie(b.rows, b.cols) = grid_for(n_b);

    s.irs = {a, b};
    s.radio.near_threshold_m = 1e9;
    s.links.direct = false;
    s.links.single = false;
    s.links.double_reflection = true;
    return s;
}

double received_power_scaling(std::size_t n_elements, ScalingLink kind) {
    Scenario toy;
    std::vector<ReflectionBlock> blocks;
    if (kind == ScalingLink::SingleReflection) {
        toy = single_reflection_toy(n_elements);
        blocks.push_back({0, arma::regspace<arma::uvec>(0, static_cast<arma::uword>(n_elements) - 1), 0});
    } else {
        if (n_elements % 2 != 0)
            throw std::invalid_argument("received_power_scaling: the equal split needs an even element count");
        if (n_elements < 2) throw std::invalid_argument("received_power_scaling: need at least two elements");
        const std::size_t half = n_elements / 2;
        toy = double_reflection_toy(half, half);
        blocks.push_back({0, arma::regspace<arma::uvec>(0, static_cast<arma::uword>(half) - 1), 0});
        blocks.push_back({1, arma::regspace<arma::uvec>(0, static_cast<arma::uword>(half) - 1), 0});
    }

    // The toys are fading-free, so any seed/trial gives the same set.
    const ChannelSet cs = build_channel_set(toy, 0, 0);
    const auto [rs, report] = optimize_reflections(cs, blocks, toy.radio);
    (void)report;
    return received_power_mw(effective_channel(cs, rs, 0).total, toy.radio);
}

}  // namespace irssim
