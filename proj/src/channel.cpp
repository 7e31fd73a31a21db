// SPDX-License-Identifier: Apache-2.0
//
// Part of irssim, a link-level simulator for reflecting-surface deployment
// studies in multi-user cells.

#include "irssim/channel.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace irssim {

namespace {

// Model constants for the three link classes.  The near/far threshold lives
// in RadioConfig; these exponents and the Rician K are fixed by the model.
constexpr double kLosExponent = 2.2;
constexpr double kFarIrsExponent = 2.5;
constexpr double kDirectExponent = 3.0;
constexpr double kFarIrsRicianKDb = 5.0;

constexpr double kTwoPi = 6.283185307179586476925286766559;

/// Fills a matrix with iid CN(0, 1) entries in row-major order so the
/// realization is independent of any storage layout.
arma::cx_mat draw_iid_gaussian(std::size_t rows, std::size_t cols, StreamRng& rng) {
    arma::cx_mat w(rows, cols);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) w(r, c) = rng.cgaussian();
    return w;
}

}  // namespace

double path_gain_db(double d_m, double alpha, double ref_gain_db) {
    if (d_m <= 0.0) throw std::domain_error("path_gain_db: distance must be positive");
    return ref_gain_db - 10.0 * alpha * std::log10(d_m);
}

arma::cx_vec steering_vector(const ArrayGeometry& geom, const Vec3& dir_local) {
    arma::cx_vec a(geom.count());
    switch (geom.kind) {
        case ArrayGeometry::Kind::Single:
            a(0) = 1.0;
            break;
        case ArrayGeometry::Kind::Linear:
            for (std::size_t n = 0; n < geom.rows; ++n) {
                const double phase = kTwoPi * geom.spacing * static_cast<double>(n) * dir_local.x;
                a(n) = std::polar(1.0, phase);
            }
            break;
        case ArrayGeometry::Kind::Planar:
            for (std::size_t r = 0; r < geom.rows; ++r)
                for (std::size_t c = 0; c < geom.cols; ++c) {
                    const double phase = kTwoPi * geom.spacing *
                                         (static_cast<double>(r) * dir_local.x + static_cast<double>(c) * dir_local.y);
                    a(r * geom.cols + c) = std::polar(1.0, phase);
                }
            break;
    }
    return a;
}

arma::cx_mat draw_channel(const LinkModel& model, const ArrayGeometry& tx, const ArrayGeometry& rx, double distance_m,
                          const Vec3& dep_local, const Vec3& arr_local, double ref_gain_db, std::uint64_t seed,
                          const StreamTag& tag) {
    const double amp = db_to_amplitude(path_gain_db(distance_m, model.path_loss_exponent, ref_gain_db));
    const std::size_t m = rx.count();
    const std::size_t n = tx.count();

    switch (model.law) {
        case FadingLaw::PureLos: {
            const arma::cx_vec a_rx = steering_vector(rx, arr_local);
            const arma::cx_vec a_tx = steering_vector(tx, dep_local);
            return amp * (a_rx * a_tx.st());
        }
        case FadingLaw::Rician: {
            const arma::cx_vec a_rx = steering_vector(rx, arr_local);
            const arma::cx_vec a_tx = steering_vector(tx, dep_local);
            const double k = db_to_linear(model.rician_k_db);
            StreamRng rng(seed, tag);
            arma::cx_mat h = std::sqrt(k / (k + 1.0)) * (a_rx * a_tx.st()) +
                             std::sqrt(1.0 / (k + 1.0)) * draw_iid_gaussian(m, n, rng);
            return amp * h;
        }
        case FadingLaw::Rayleigh: {
            StreamRng rng(seed, tag);
            return amp * draw_iid_gaussian(m, n, rng);
        }
    }
    throw std::logic_error("draw_channel: unreachable fading law");
}

LinkModel classify_link(const Scenario& s, const NodeRef& a, const NodeRef& b) {
    const auto position_of = [&s](const NodeRef& node) -> Position {
        switch (node.type) {
            case NodeRef::Type::Bs:
                return s.bs.position;
            case NodeRef::Type::User:
                if (node.index >= s.users.size())
                    throw std::invalid_argument("classify_link: user index " + std::to_string(node.index) +
                                                " out of range");
                return s.users[node.index].position;
            case NodeRef::Type::Irs:
                if (node.index >= s.irs.size())
                    throw std::invalid_argument("classify_link: irs index " + std::to_string(node.index) +
                                                " out of range");
                return s.irs[node.index].position;
        }
        throw std::logic_error("classify_link: unreachable node type");
    };

    if (a.type == b.type && a.index == b.index)
        throw std::invalid_argument("classify_link: a link needs two distinct endpoints");

    const Position pos_a = position_of(a);
    const Position pos_b = position_of(b);
    const bool a_irs = a.type == NodeRef::Type::Irs;
    const bool b_irs = b.type == NodeRef::Type::Irs;

    if (!a_irs && !b_irs) {
        if (a.type == b.type) throw std::invalid_argument("classify_link: no direct user-user or BS-BS links");
        return {FadingLaw::Rayleigh, kDirectExponent, 0.0};
    }
    if (a_irs && b_irs) {
        // Panel placement is deliberate, so panel-to-panel hops are modeled
        // as geometric line of sight regardless of length.
        return {FadingLaw::PureLos, kLosExponent, 0.0};
    }
    const double d = distance(pos_a, pos_b);
    if (d <= s.radio.near_threshold_m) return {FadingLaw::PureLos, kLosExponent, 0.0};
    return {FadingLaw::Rician, kFarIrsExponent, kFarIrsRicianKDb};
}

namespace {

struct NodeFrame {
    Position position;
    ArrayGeometry geom;
    SurfaceBasis basis;
};

/// Link matrix from tx to rx with directions resolved in each node's frame.
arma::cx_mat draw_link(const Scenario& s, const NodeFrame& tx, const NodeFrame& rx, const NodeRef& tx_ref,
                       const NodeRef& rx_ref, std::uint64_t seed, const StreamTag& tag) {
    const LinkModel model = classify_link(s, tx_ref, rx_ref);
    const double d = distance(tx.position, rx.position);
    const Vec3 dep = tx.basis.to_local(unit_from_to(tx.position, rx.position));
    const Vec3 arr = rx.basis.to_local(unit_from_to(rx.position, tx.position));
    return draw_channel(model, tx.geom, rx.geom, d, dep, arr, s.radio.path_gain_ref_db, seed, tag);
}

}  // namespace

ChannelSet build_channel_set(const Scenario& s, std::uint64_t seed, std::uint64_t trial) {
    const std::size_t n_irs = s.irs.size();
    const std::size_t n_users = s.users.size();
    const std::size_t m = s.bs.antennas;

    ChannelSet cs;
    cs.bs_antennas = m;
    cs.n_users = n_users;
    cs.toggles = s.links;
    cs.side.resize(n_irs);
    cs.elements.resize(n_irs);

    // The BS array runs along the global x axis; its local frame is global.
    NodeFrame bs_frame{s.bs.position, ArrayGeometry::linear(m, s.radio.element_spacing),
                       SurfaceBasis{{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}}};

    std::vector<NodeFrame> irs_frames(n_irs);
    for (std::size_t i = 0; i < n_irs; ++i) {
        const IrsPanel& p = s.irs[i];
        cs.side[i] = p.side;
        cs.elements[i] = p.elements();
        irs_frames[i] = {p.position, ArrayGeometry::planar(p.rows, p.cols, s.radio.element_spacing),
                         basis_for_normal(p.normal)};
    }

    std::vector<NodeFrame> user_frames(n_users);
    for (std::size_t k = 0; k < n_users; ++k)
        user_frames[k] = {s.users[k].position, ArrayGeometry::single(),
                          SurfaceBasis{{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}}};

    // Direct links: user k -> BS (always drawn; the toggle acts at
    // composition time).
    cs.direct.resize(n_users);
    for (std::size_t k = 0; k < n_users; ++k) {
        const StreamTag tag{trial, stream_kind::direct, static_cast<std::uint32_t>(k), 0};
        cs.direct[k] = draw_link(s, user_frames[k], bs_frame, NodeRef::user(k), NodeRef::bs(), seed, tag);
    }

    // Panel -> BS links.
    cs.bs_irs.resize(n_irs);
    cs.bs_mask.assign(n_irs, 0);
    for (std::size_t i = 0; i < n_irs; ++i) {
        const bool lit = cs.elements[i] > 0 && covers(s.irs[i], s.bs.position);
        cs.bs_mask[i] = lit ? 1 : 0;
        if (lit) {
            const StreamTag tag{trial, stream_kind::bs_irs, static_cast<std::uint32_t>(i), 0};
            cs.bs_irs[i] = draw_link(s, irs_frames[i], bs_frame, NodeRef::irs(i), NodeRef::bs(), seed, tag);
        } else {
            cs.bs_irs[i].zeros(m, cs.elements[i]);
        }
    }

    // User -> panel links.
    cs.irs_user.assign(n_irs, std::vector<arma::cx_vec>(n_users));
    cs.user_mask.assign(n_irs, std::vector<std::uint8_t>(n_users, 0));
    for (std::size_t i = 0; i < n_irs; ++i)
        for (std::size_t k = 0; k < n_users; ++k) {
            const bool lit = cs.elements[i] > 0 && covers(s.irs[i], s.users[k].position);
            cs.user_mask[i][k] = lit ? 1 : 0;
            if (lit) {
                const StreamTag tag{trial, stream_kind::irs_user, static_cast<std::uint32_t>(i),
                                    static_cast<std::uint32_t>(k)};
                cs.irs_user[i][k] =
                    draw_link(s, user_frames[k], irs_frames[i], NodeRef::user(k), NodeRef::irs(i), seed, tag);
            } else {
                cs.irs_user[i][k].zeros(cs.elements[i]);
            }
        }

    // Panel -> panel hops, only from a user-side panel j toward a BS-side
    // panel i and only when the faces see each other.
    cs.irs_irs.assign(n_irs, std::vector<arma::cx_mat>(n_irs));
    cs.pair_mask.assign(n_irs, std::vector<std::uint8_t>(n_irs, 0));
    for (std::size_t i = 0; i < n_irs; ++i) {
        if (s.irs[i].side != IrsSide::BsSide) continue;
        for (std::size_t j = 0; j < n_irs; ++j) {
            if (s.irs[j].side != IrsSide::UserSide) continue;
            const bool lit = cs.elements[i] > 0 && cs.elements[j] > 0 && covers(s.irs[i], s.irs[j].position) &&
                             covers(s.irs[j], s.irs[i].position);
            cs.pair_mask[i][j] = lit ? 1 : 0;
            if (lit) {
                const StreamTag tag{trial, stream_kind::irs_irs, static_cast<std::uint32_t>(i),
                                    static_cast<std::uint32_t>(j)};
                cs.irs_irs[i][j] =
                    draw_link(s, irs_frames[j], irs_frames[i], NodeRef::irs(j), NodeRef::irs(i), seed, tag);
            }
        }
    }

    return cs;
}

}  // namespace irssim
