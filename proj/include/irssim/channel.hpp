// SPDX-License-Identifier: Apache-2.0
//
// Part of irssim, a link-level simulator for reflecting-surface deployment
// studies in multi-user cells.
//
// Channel: distance-based path gains, array steering vectors, the three
// small-scale fading laws, link classification, and the draw of one trial's
// complete set of link matrices.

#pragma once

#include <armadillo>
#include <complex>
#include <cstdint>
#include <vector>

#include "irssim/rng.hpp"
#include "irssim/scenario.hpp"

namespace irssim {

enum class FadingLaw { PureLos, Rician, Rayleigh };

/// Large+small-scale model of one link.
struct LinkModel {
    FadingLaw law = FadingLaw::PureLos;
    double path_loss_exponent = 2.0;
    double rician_k_db = 0.0;  ///< LoS-to-scatter power ratio; Rician only
};

/// Antenna layout of one node, with positions expressed on the node's local
/// axes (u along rows / the linear axis, v along columns).
struct ArrayGeometry {
    enum class Kind { Single, Linear, Planar };
    Kind kind = Kind::Single;
    std::size_t rows = 1;
    std::size_t cols = 1;
    double spacing = 0.5;  ///< element pitch in wavelengths

    static ArrayGeometry single() { return {Kind::Single, 1, 1, 0.5}; }
    static ArrayGeometry linear(std::size_t n, double spacing) { return {Kind::Linear, n, 1, spacing}; }
    static ArrayGeometry planar(std::size_t rows, std::size_t cols, double spacing) {
        return {Kind::Planar, rows, cols, spacing};
    }

    std::size_t count() const { return rows * cols; }
};

/// Average channel gain in dB of a link of length `d_m` meters:
/// ref_gain_db - 10 * alpha * log10(d_m).  Throws std::domain_error for
/// non-positive distances.
double path_gain_db(double d_m, double alpha, double ref_gain_db);

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double db_to_amplitude(double db) { return std::pow(10.0, db / 20.0); }

/// Far-field steering vector for a propagation direction given in the
/// array's local frame.  Planar arrays are indexed row-major: element
/// (r, c) sits at (r * spacing) u + (c * spacing) v.
arma::cx_vec steering_vector(const ArrayGeometry& geom, const Vec3& dir_local);

/// Draws the rx.count() x tx.count() matrix of one link.  `dep_local` /
/// `arr_local` are the unit departure/arrival directions in the transmit /
/// receive array frames.  The draw consumes a private random stream keyed by
/// (seed, tag), so it is reproducible regardless of call order.
arma::cx_mat draw_channel(const LinkModel& model, const ArrayGeometry& tx, const ArrayGeometry& rx, double distance_m,
                          const Vec3& dep_local, const Vec3& arr_local, double ref_gain_db, std::uint64_t seed,
                          const StreamTag& tag);

/// One endpoint of a link.
struct NodeRef {
    enum class Type { Bs, User, Irs };
    Type type = Type::Bs;
    std::size_t index = 0;

    static NodeRef bs() { return {Type::Bs, 0}; }
    static NodeRef user(std::size_t k) { return {Type::User, k}; }
    static NodeRef irs(std::size_t i) { return {Type::Irs, i}; }
};

/// Distance-driven model selection: BS <-> user links are Rayleigh with
/// exponent 3; links to an IRS within the near threshold are pure LoS with
/// exponent 2.2; longer IRS links are Rician (K = 5 dB) with exponent 2.5;
/// IRS <-> IRS links are always treated as LoS since both ends are placed
/// deliberately.  Throws std::invalid_argument for a node paired with itself
/// or an out-of-range index.
LinkModel classify_link(const Scenario& s, const NodeRef& a, const NodeRef& b);

/// All link realizations of one trial.  Matrices of links that are switched
/// off -- a panel that does not face the node, or a disabled toggle -- are
/// zero-sized placeholders guarded by the masks.
struct ChannelSet {
    std::size_t bs_antennas = 0;
    std::size_t n_users = 0;
    std::vector<IrsSide> side;              ///< per panel
    std::vector<std::size_t> elements;      ///< per panel

    std::vector<arma::cx_vec> direct;       ///< [k]: M x 1 user -> BS
    std::vector<arma::cx_mat> bs_irs;       ///< [i]: M x N_i panel -> BS
    std::vector<std::vector<arma::cx_vec>> irs_user;  ///< [i][k]: N_i x 1 user -> panel
    std::vector<std::vector<arma::cx_mat>> irs_irs;   ///< [i][j]: N_i x N_j, BS-side i <- user-side j

    std::vector<std::uint8_t> bs_mask;                   ///< covers(panel i, BS) and N_i > 0
    std::vector<std::vector<std::uint8_t>> user_mask;    ///< covers(panel i, user k) and N_i > 0
    std::vector<std::vector<std::uint8_t>> pair_mask;    ///< panels i, j face each other, both non-empty

    LinkToggles toggles;
};

/// Draws every active link of the scenario for one trial.  Each link has its
/// own random stream, so the set is identical no matter how many other draws
/// happened before.
ChannelSet build_channel_set(const Scenario& s, std::uint64_t seed, std::uint64_t trial);

}  // namespace irssim
