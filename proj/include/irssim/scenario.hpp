// SPDX-License-Identifier: Apache-2.0
//
// Part of irssim, a link-level simulator for reflecting-surface deployment
// studies in multi-user cells.
//
// Scenario: the static description of one cell -- base station, users,
// reflecting surfaces, radio constants -- plus loading/saving of the sectioned
// key-value config format and the bundled default topology.

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "irssim/geometry.hpp"

namespace irssim {

/// Which end of the cell a surface assists: mounted next to the base station
/// or next to a user hot spot.
enum class IrsSide { BsSide, UserSide };

/// Policy for reflection coefficients of elements that serve nobody.
enum class IdlePolicy { ZeroPhase, RandomPhase };

struct BaseStation {
    Position position;
    std::size_t antennas = 1;  ///< uniform linear array along the global x axis
};

struct User {
    Position position;
};

struct IrsPanel {
    Position position;
    Vec3 normal{0.0, 0.0, 1.0};  ///< boresight; reflects only the facing half-space
    IrsSide side = IrsSide::UserSide;
    std::size_t rows = 0;
    std::size_t cols = 0;

    std::size_t elements() const { return rows * cols; }
};

struct RadioConfig {
    double tx_power_dbm = 5.0;
    double noise_power_dbm = -75.0;
    double path_gain_ref_db = -30.0;   ///< beta_0: channel gain at 1 m, in dB
    double element_spacing = 0.5;      ///< array pitch in wavelengths
    double near_threshold_m = 15.0;    ///< IRS links at most this long count as near
    IdlePolicy idle_policy = IdlePolicy::ZeroPhase;
};

/// Model toggles for the propagation paths.  They exist for controlled
/// experiments (for example isolating the double-reflection path in the
/// scaling toys); coverage masks still apply on top of them.
struct LinkToggles {
    bool direct = true;
    bool single = true;
    bool double_reflection = true;
};

struct Scenario {
    BaseStation bs;
    std::vector<User> users;
    std::vector<IrsPanel> irs;
    RadioConfig radio;
    LinkToggles links;
    /// Non-fatal issues found while loading (e.g. a normal that had to be
    /// rescaled).  Not serialized.
    std::vector<std::string> warnings;
};

bool operator==(const BaseStation& a, const BaseStation& b);
bool operator==(const User& a, const User& b);
bool operator==(const IrsPanel& a, const IrsPanel& b);
bool operator==(const RadioConfig& a, const RadioConfig& b);
bool operator==(const LinkToggles& a, const LinkToggles& b);
/// Equality of everything that is serialized (warnings are ignored).
bool operator==(const Scenario& a, const Scenario& b);

/// True when the panel's face points toward `p`, i.e. p lies strictly in the
/// open half-space in front of the panel.  A panel reflects only for nodes it
/// covers.
bool covers(const IrsPanel& panel, const Position& p);

/// Validates the cross-field invariants (distinct positions, at least one BS
/// antenna, unit normals, positive spacing).  Throws std::invalid_argument on
/// violation; appends to `s.warnings` for non-fatal oddities.
void validate_scenario(Scenario& s);

/// Parses the sectioned key-value config format.  Throws std::runtime_error
/// with a line number on malformed input and std::invalid_argument when the
/// parsed scenario violates an invariant.
Scenario parse_scenario(std::istream& in);
Scenario parse_scenario_string(const std::string& text);
Scenario load_scenario(const std::string& path);

/// Writes a config that parses back to an identical scenario (doubles are
/// printed with 17 significant digits, so the round trip is exact).
std::string serialize_scenario(const Scenario& s);
void save_scenario(const Scenario& s, const std::string& path);

/// The bundled three-user topology: one BS-side panel next to the base
/// station and one small panel at each of the two user hot spots.  Mirrors
/// data/default.scenario.
Scenario default_scenario();

/// Near-square rows x cols factorization of an element count, rows <= cols;
/// (0, 0) for 0.  Used whenever an element budget is turned into a panel
/// grid.
std::pair<std::size_t, std::size_t> grid_for(std::size_t n_elements);

}  // namespace irssim
