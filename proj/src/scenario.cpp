// SPDX-License-Identifier: Apache-2.0
//
// Part of irssim, a link-level simulator for reflecting-surface deployment
// studies in multi-user cells.

#include "irssim/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

namespace irssim {

namespace {

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt_vec3(const Vec3& v) {
    return fmt_double(v.x) + " " + fmt_double(v.y) + " " + fmt_double(v.z);
}

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

[[noreturn]] void fail_at(int line_no, const std::string& what) {
    throw std::runtime_error("line " + std::to_string(line_no) + ": " + what);
}

double parse_double(const std::string& value, int line_no) {
    std::istringstream in(value);
    double d = 0.0;
    std::string rest;
    if (!(in >> d) || (in >> rest)) fail_at(line_no, "expected a number, got '" + value + "'");
    return d;
}

std::size_t parse_count(const std::string& value, int line_no) {
    std::istringstream in(value);
    long long n = 0;
    std::string rest;
    if (!(in >> n) || (in >> rest) || n < 0) fail_at(line_no, "expected a non-negative integer, got '" + value + "'");
    return static_cast<std::size_t>(n);
}

Vec3 parse_vec3(const std::string& value, int line_no) {
    std::istringstream in(value);
    Vec3 v;
    std::string rest;
    if (!(in >> v.x >> v.y >> v.z) || (in >> rest)) fail_at(line_no, "expected three numbers, got '" + value + "'");
    return v;
}

bool parse_bool(const std::string& value, int line_no) {
    if (value == "on" || value == "true" || value == "1") return true;
    if (value == "off" || value == "false" || value == "0") return false;
    fail_at(line_no, "expected on/off, got '" + value + "'");
}

IrsSide parse_side(const std::string& value, int line_no) {
    if (value == "bs") return IrsSide::BsSide;
    if (value == "user") return IrsSide::UserSide;
    fail_at(line_no, "expected side bs/user, got '" + value + "'");
}

IdlePolicy parse_idle(const std::string& value, int line_no) {
    if (value == "zero") return IdlePolicy::ZeroPhase;
    if (value == "random") return IdlePolicy::RandomPhase;
    fail_at(line_no, "expected idle_policy zero/random, got '" + value + "'");
}

}  // namespace

bool operator==(const BaseStation& a, const BaseStation& b) {
    return a.position == b.position && a.antennas == b.antennas;
}

bool operator==(const User& a, const User& b) { return a.position == b.position; }

bool operator==(const IrsPanel& a, const IrsPanel& b) {
    return a.position == b.position && a.normal == b.normal && a.side == b.side && a.rows == b.rows &&
           a.cols == b.cols;
}

bool operator==(const RadioConfig& a, const RadioConfig& b) {
    return a.tx_power_dbm == b.tx_power_dbm && a.noise_power_dbm == b.noise_power_dbm &&
           a.path_gain_ref_db == b.path_gain_ref_db && a.element_spacing == b.element_spacing &&
           a.near_threshold_m == b.near_threshold_m && a.idle_policy == b.idle_policy;
}

bool operator==(const LinkToggles& a, const LinkToggles& b) {
    return a.direct == b.direct && a.single == b.single && a.double_reflection == b.double_reflection;
}

bool operator==(const Scenario& a, const Scenario& b) {
    return a.bs == b.bs && a.users == b.users && a.irs == b.irs && a.radio == b.radio && a.links == b.links;
}

bool covers(const IrsPanel& panel, const Position& p) {
    // Strict half-space test: a node exactly on the panel plane is not lit.
    return dot(panel.normal, p - panel.position) > 0.0;
}

void validate_scenario(Scenario& s) {
    if (s.bs.antennas < 1) throw std::invalid_argument("base station needs at least one antenna");
    if (s.radio.element_spacing <= 0.0) throw std::invalid_argument("element_spacing must be positive");
    if (s.radio.near_threshold_m < 0.0) throw std::invalid_argument("near_threshold_m must be non-negative");

    std::vector<Position> all;
    all.push_back(s.bs.position);
    for (const auto& u : s.users) all.push_back(u.position);
    for (const auto& p : s.irs) all.push_back(p.position);
    for (std::size_t i = 0; i < all.size(); ++i)
        for (std::size_t j = i + 1; j < all.size(); ++j)
            if (all[i] == all[j]) throw std::invalid_argument("node positions must be pairwise distinct");

    for (std::size_t i = 0; i < s.irs.size(); ++i) {
        auto& panel = s.irs[i];
        const double n = norm(panel.normal);
        if (n == 0.0) throw std::invalid_argument("irs normal must be non-zero");
        if (std::abs(n - 1.0) > 1e-9) {
            panel.normal = {panel.normal.x / n, panel.normal.y / n, panel.normal.z / n};
            s.warnings.push_back("irs " + std::to_string(i) + ": normal rescaled to unit length");
        }
    }
}

namespace {

enum class Section { None, Bs, Radio, Links, User, Irs };

struct ParseState {
    Scenario scenario;
    Section section = Section::None;
    bool saw_bs = false;
    bool bs_has_position = false;
    std::vector<bool> user_has_position;
    std::vector<bool> irs_has_position;
    std::vector<bool> irs_has_side;
};

void handle_section(ParseState& st, const std::string& name, int line_no) {
    if (name == "bs") {
        if (st.saw_bs) fail_at(line_no, "duplicate [bs] section");
        st.saw_bs = true;
        st.section = Section::Bs;
    } else if (name == "radio") {
        st.section = Section::Radio;
    } else if (name == "links") {
        st.section = Section::Links;
    } else if (name == "user") {
        st.scenario.users.emplace_back();
        st.user_has_position.push_back(false);
        st.section = Section::User;
    } else if (name == "irs") {
        st.scenario.irs.emplace_back();
        st.irs_has_position.push_back(false);
        st.irs_has_side.push_back(false);
        st.section = Section::Irs;
    } else {
        fail_at(line_no, "unknown section [" + name + "]");
    }
}

void handle_key(ParseState& st, const std::string& key, const std::string& value, int line_no) {
    Scenario& s = st.scenario;
    switch (st.section) {
        case Section::None:
            fail_at(line_no, "key '" + key + "' outside any section");
        case Section::Bs:
            if (key == "position") {
                s.bs.position = parse_vec3(value, line_no);
                st.bs_has_position = true;
            } else if (key == "antennas") {
                s.bs.antennas = parse_count(value, line_no);
            } else {
                fail_at(line_no, "unknown key '" + key + "' in [bs]");
            }
            break;
        case Section::Radio:
            if (key == "tx_power_dbm") s.radio.tx_power_dbm = parse_double(value, line_no);
            else if (key == "noise_power_dbm") s.radio.noise_power_dbm = parse_double(value, line_no);
            else if (key == "path_gain_ref_db") s.radio.path_gain_ref_db = parse_double(value, line_no);
            else if (key == "element_spacing") s.radio.element_spacing = parse_double(value, line_no);
            else if (key == "near_threshold_m") s.radio.near_threshold_m = parse_double(value, line_no);
            else if (key == "idle_policy") s.radio.idle_policy = parse_idle(value, line_no);
            else fail_at(line_no, "unknown key '" + key + "' in [radio]");
            break;
        case Section::Links:
            if (key == "direct") s.links.direct = parse_bool(value, line_no);
            else if (key == "single") s.links.single = parse_bool(value, line_no);
            else if (key == "double") s.links.double_reflection = parse_bool(value, line_no);
            else fail_at(line_no, "unknown key '" + key + "' in [links]");
            break;
        case Section::User:
            if (key == "position") {
                s.users.back().position = parse_vec3(value, line_no);
                st.user_has_position.back() = true;
            } else {
                fail_at(line_no, "unknown key '" + key + "' in [user]");
            }
            break;
        case Section::Irs: {
            IrsPanel& panel = s.irs.back();
            if (key == "position") {
                panel.position = parse_vec3(value, line_no);
                st.irs_has_position.back() = true;
            } else if (key == "normal") {
                panel.normal = parse_vec3(value, line_no);
            } else if (key == "side") {
                panel.side = parse_side(value, line_no);
                st.irs_has_side.back() = true;
            } else if (key == "rows") {
                panel.rows = parse_count(value, line_no);
            } else if (key == "cols") {
                panel.cols = parse_count(value, line_no);
            } else {
                fail_at(line_no, "unknown key '" + key + "' in [irs]");
            }
            break;
        }
    }
}

}  // namespace

Scenario parse_scenario(std::istream& in) {
    ParseState st;
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        const std::string line = trim(raw);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') fail_at(line_no, "malformed section header '" + line + "'");
            handle_section(st, trim(line.substr(1, line.size() - 2)), line_no);
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string::npos) fail_at(line_no, "expected 'key = value', got '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) fail_at(line_no, "expected 'key = value', got '" + line + "'");
        handle_key(st, key, value, line_no);
    }

    if (!st.saw_bs || !st.bs_has_position) throw std::runtime_error("missing [bs] section with a position");
    for (std::size_t i = 0; i < st.user_has_position.size(); ++i)
        if (!st.user_has_position[i]) throw std::runtime_error("user " + std::to_string(i) + " has no position");
    for (std::size_t i = 0; i < st.irs_has_position.size(); ++i) {
        if (!st.irs_has_position[i]) throw std::runtime_error("irs " + std::to_string(i) + " has no position");
        if (!st.irs_has_side[i]) throw std::runtime_error("irs " + std::to_string(i) + " has no side (bs/user)");
    }

    validate_scenario(st.scenario);
    return st.scenario;
}

Scenario parse_scenario_string(const std::string& text) {
    std::istringstream in(text);
    return parse_scenario(in);
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open scenario file '" + path + "'");
    try {
        return parse_scenario(in);
    } catch (const std::runtime_error& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

std::string serialize_scenario(const Scenario& s) {
    std::ostringstream out;
    out << "[bs]\n";
    out << "position = " << fmt_vec3(s.bs.position) << "\n";
    out << "antennas = " << s.bs.antennas << "\n";
    out << "\n[radio]\n";
    out << "tx_power_dbm = " << fmt_double(s.radio.tx_power_dbm) << "\n";
    out << "noise_power_dbm = " << fmt_double(s.radio.noise_power_dbm) << "\n";
    out << "path_gain_ref_db = " << fmt_double(s.radio.path_gain_ref_db) << "\n";
    out << "element_spacing = " << fmt_double(s.radio.element_spacing) << "\n";
    out << "near_threshold_m = " << fmt_double(s.radio.near_threshold_m) << "\n";
    out << "idle_policy = " << (s.radio.idle_policy == IdlePolicy::ZeroPhase ? "zero" : "random") << "\n";
    out << "\n[links]\n";
    out << "direct = " << (s.links.direct ? "on" : "off") << "\n";
    out << "single = " << (s.links.single ? "on" : "off") << "\n";
    out << "double = " << (s.links.double_reflection ? "on" : "off") << "\n";
    for (const auto& u : s.users) {
        out << "\n[user]\n";
        out << "position = " << fmt_vec3(u.position) << "\n";
    }
    for (const auto& p : s.irs) {
        out << "\n[irs]\n";
        out << "side = " << (p.side == IrsSide::BsSide ? "bs" : "user") << "\n";
        out << "position = " << fmt_vec3(p.position) << "\n";
        out << "normal = " << fmt_vec3(p.normal) << "\n";
        out << "rows = " << p.rows << "\n";
        out << "cols = " << p.cols << "\n";
    }
    return out.str();
}

void save_scenario(const Scenario& s, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write scenario file '" + path + "'");
    out << serialize_scenario(s);
}

Scenario default_scenario() {
    Scenario s;
    s.bs.position = {0.0, 0.0, 10.0};
    s.bs.antennas = 40;

    s.users = {User{{190.0, -30.0, 1.5}}, User{{190.0, 20.0, 1.5}}, User{{-100.0, 60.0, 1.5}}};

    // One large panel next to the base station.  Its face points along +x,
    // toward the BS, users 1 and 2, and the panel at the user-2 hot spot;
    // user 3 and its local panel sit behind it.
    IrsPanel bs_panel;
    bs_panel.position = {-5.0, 0.0, 10.0};
    bs_panel.normal = {1.0, 0.0, 0.0};
    bs_panel.side = IrsSide::BsSide;
    bs_panel.rows = 15;
    bs_panel.cols = 20;

    // Small panel above the user-2 hot spot, facing back toward the cell.
    IrsPanel hotspot_a;
    hotspot_a.position = {193.0, 23.0, 3.0};
    hotspot_a.normal = {-1.0, 0.0, 0.0};
    hotspot_a.side = IrsSide::UserSide;
    hotspot_a.rows = 5;
    hotspot_a.cols = 10;

    // Small panel above the user-3 hot spot on the far side of the cell.
    IrsPanel hotspot_b;
    hotspot_b.position = {-103.0, 62.0, 3.0};
    hotspot_b.normal = {1.0, 0.0, 0.0};
    hotspot_b.side = IrsSide::UserSide;
    hotspot_b.rows = 5;
    hotspot_b.cols = 10;

    s.irs = {bs_panel, hotspot_a, hotspot_b};
    return s;
}

std::pair<std::size_t, std::size_t> grid_for(std::size_t n_elements) {
    if (n_elements == 0) return {0, 0};
    for (std::size_t d = static_cast<std::size_t>(std::sqrt(static_cast<double>(n_elements))); d >= 1; --d)
        if (n_elements % d == 0) return {d, n_elements / d};
    return {1, n_elements};
}

}  // namespace irssim
