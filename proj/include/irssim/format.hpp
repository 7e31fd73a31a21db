// SPDX-License-Identifier: Apache-2.0
//
// Part of irssim, a link-level simulator for reflecting-surface deployment
// studies in multi-user cells.

#pragma once

#include <cstdio>
#include <string>

namespace irssim {

/// Shortest exact decimal form of a double (17 significant digits round-trip
/// exactly), used everywhere we serialize numbers so that identical results
/// produce identical bytes.
inline std::string format_full(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace irssim
