// SPDX-License-Identifier: Apache-2.0
//
// Part of irssim, a link-level simulator for reflecting-surface deployment
// studies in multi-user cells.

#include "irssim/composite.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace irssim {

ReflectionState zero_phase_state(const ChannelSet& cs) {
    ReflectionState rs;
    rs.coeffs.resize(cs.elements.size());
    for (std::size_t i = 0; i < cs.elements.size(); ++i) rs.coeffs[i].ones(cs.elements[i]);
    return rs;
}

void validate_reflection_state(const ChannelSet& cs, const ReflectionState& rs) {
    if (rs.coeffs.size() != cs.elements.size())
        throw std::invalid_argument("reflection state covers " + std::to_string(rs.coeffs.size()) +
                                    " panels, channel set has " + std::to_string(cs.elements.size()));
    for (std::size_t i = 0; i < rs.coeffs.size(); ++i) {
        if (rs.coeffs[i].n_elem != cs.elements[i])
            throw std::invalid_argument("panel " + std::to_string(i) + ": reflection state has " +
                                        std::to_string(rs.coeffs[i].n_elem) + " coefficients, panel has " +
                                        std::to_string(cs.elements[i]) + " elements");
        for (const auto& c : rs.coeffs[i])
            if (std::abs(std::abs(c) - 1.0) > 1e-9)
                throw std::invalid_argument("panel " + std::to_string(i) +
                                            ": reflection coefficients must have unit modulus");
    }
}

CompositeChannel effective_channel(const ChannelSet& cs, const ReflectionState& rs, std::size_t k) {
    if (k >= cs.n_users) throw std::invalid_argument("effective_channel: user index out of range");
    if (rs.coeffs.size() != cs.elements.size())
        throw std::invalid_argument("effective_channel: reflection state / channel set panel mismatch");
    for (std::size_t i = 0; i < rs.coeffs.size(); ++i)
        if (rs.coeffs[i].n_elem != cs.elements[i])
            throw std::invalid_argument("effective_channel: panel " + std::to_string(i) + " size mismatch");

    const std::size_t n_irs = cs.elements.size();
    CompositeChannel out;
    out.total.zeros(cs.bs_antennas);
    out.direct.zeros(cs.bs_antennas);

    if (cs.toggles.direct) {
        out.direct = cs.direct[k];
        out.total += out.direct;
    }

    if (cs.toggles.single) {
        for (std::size_t i = 0; i < n_irs; ++i) {
            if (!cs.bs_mask[i] || !cs.user_mask[i][k]) continue;
            arma::cx_vec term = cs.bs_irs[i] * (rs.coeffs[i] % cs.irs_user[i][k]);
            out.total += term;
            out.single_terms.emplace_back(i, std::move(term));
        }
    }

    if (cs.toggles.double_reflection) {
        for (std::size_t i = 0; i < n_irs; ++i) {
            if (cs.side[i] != IrsSide::BsSide || !cs.bs_mask[i]) continue;
            for (std::size_t j = 0; j < n_irs; ++j) {
                if (!cs.pair_mask[i][j] || !cs.user_mask[j][k]) continue;
                arma::cx_vec through = cs.irs_irs[i][j] * (rs.coeffs[j] % cs.irs_user[j][k]);
                arma::cx_vec term = cs.bs_irs[i] * (rs.coeffs[i] % through);
                out.total += term;
                out.double_terms.emplace_back(i, j, std::move(term));
            }
        }
    }

    return out;
}

double mrc_snr(const arma::cx_vec& h, const RadioConfig& radio) {
    const double p_mw = db_to_linear(radio.tx_power_dbm);
    const double noise_mw = db_to_linear(radio.noise_power_dbm);
    return p_mw * std::real(arma::cdot(h, h)) / noise_mw;
}

double received_power_mw(const arma::cx_vec& h, const RadioConfig& radio) {
    return db_to_linear(radio.tx_power_dbm) * std::real(arma::cdot(h, h));
}

double rate_bps_hz(double snr) {
    if (snr < 0.0) throw std::domain_error("rate_bps_hz: SNR must be non-negative");
    return std::log2(1.0 + snr);
}

}  // namespace irssim
