// SPDX-License-Identifier: Apache-2.0
//
// Part of irssim, a link-level simulator for reflecting-surface deployment
// studies in multi-user cells.
//
// Composite: superposition of the direct, single-reflection and
// double-reflection paths into one effective uplink vector per user, and the
// maximum-ratio-combining receiver metrics derived from it.

#pragma once

#include <armadillo>
#include <cstddef>
#include <tuple>
#include <utility>
#include <vector>

#include "irssim/channel.hpp"

namespace irssim {

/// Per-panel reflection coefficients, one unit-modulus complex number per
/// element.
struct ReflectionState {
    std::vector<arma::cx_vec> coeffs;
};

/// All-ones coefficients (zero phase) sized for the given channel set.
ReflectionState zero_phase_state(const ChannelSet& cs);

/// Throws std::invalid_argument unless the state matches the channel set's
/// panel sizes and every coefficient has unit modulus (tolerance 1e-9).
void validate_reflection_state(const ChannelSet& cs, const ReflectionState& rs);

/// Effective uplink channel of one user, kept with its per-path breakdown so
/// tests and diagnostics can attribute power to mechanisms.
struct CompositeChannel {
    arma::cx_vec total;
    arma::cx_vec direct;
    /// (panel, contribution): BS <- panel <- user
    std::vector<std::pair<std::size_t, arma::cx_vec>> single_terms;
    /// (BS-side panel, user-side panel, contribution): BS <- i <- j <- user
    std::vector<std::tuple<std::size_t, std::size_t, arma::cx_vec>> double_terms;
};

/// Superimposes every active propagation path for user `k` under the given
/// reflection coefficients.  Coverage masks and link toggles decide which
/// paths contribute; a breakdown entry is recorded only for contributing
/// paths.  Throws std::invalid_argument on dimension mismatches.
CompositeChannel effective_channel(const ChannelSet& cs, const ReflectionState& rs, std::size_t k);

/// Post-combining SNR of a maximum-ratio-combining receiver: the BS points a
/// matched filter at h, so SNR = P * ||h||^2 / sigma^2 (all linear).
double mrc_snr(const arma::cx_vec& h, const RadioConfig& radio);

/// Received signal power P * ||h||^2 in mW; the optimizer's objective.
double received_power_mw(const arma::cx_vec& h, const RadioConfig& radio);

/// Achievable spectral efficiency log2(1 + snr) in bit/s/Hz.  Throws
/// std::domain_error for negative SNR.
double rate_bps_hz(double snr);

}  // namespace irssim
