// SPDX-License-Identifier: Apache-2.0
//
// Part of irssim, a link-level simulator for reflecting-surface deployment
// studies in multi-user cells.
//
// Deterministic stream-splitting RNG.  Every random object in a simulation is
// drawn from an engine keyed by (master seed, trial index, link tag), so the
// same object is bit-identical no matter in which order -- or on how many
// threads -- the surrounding code asks for it.

#pragma once

#include <complex>
#include <cstdint>
#include <random>

namespace irssim {

/// Identifies one independent random stream within a trial.  `kind`
/// distinguishes link families, `a`/`b` index nodes within the family.
struct StreamTag {
    std::uint64_t trial = 0;
    std::uint32_t kind = 0;
    std::uint32_t a = 0;
    std::uint32_t b = 0;
};

namespace stream_kind {
inline constexpr std::uint32_t direct = 0;    ///< user -> BS links, a = user
inline constexpr std::uint32_t bs_irs = 1;    ///< IRS -> BS links, a = irs
inline constexpr std::uint32_t irs_user = 2;  ///< user -> IRS links, a = irs, b = user
inline constexpr std::uint32_t irs_irs = 3;   ///< IRS -> IRS links, a = rx irs, b = tx irs
inline constexpr std::uint32_t idle = 4;      ///< random phases of unassigned elements, a = irs
inline constexpr std::uint32_t eval = 5;      ///< reserved evaluation streams used by searches
}  // namespace stream_kind

/// splitmix64 finalizer; the standard remedy for correlated integer seeds.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Collapse (seed, tag) into a single engine seed.  Feeding each field
/// through the mixer keeps nearby tags (trial t vs t+1, irs 0 vs 1)
/// statistically unrelated.
inline std::uint64_t stream_seed(std::uint64_t master_seed, const StreamTag& tag) {
    std::uint64_t h = mix64(master_seed);
    h = mix64(h ^ tag.trial);
    h = mix64(h ^ ((static_cast<std::uint64_t>(tag.kind) << 32) | tag.a));
    h = mix64(h ^ tag.b);
    return h;
}

/// Random engine for one stream.  The distributions are hand-rolled on top of
/// raw 64-bit draws because std::uniform_real_distribution and
/// std::normal_distribution are not bit-reproducible across standard
/// libraries.
class StreamRng {
  public:
    StreamRng(std::uint64_t master_seed, const StreamTag& tag) : engine_(stream_seed(master_seed, tag)) {}

    /// Uniform on (0, 1]; never returns 0 so it is safe inside log().
    double uniform() {
        const std::uint64_t bits = engine_();
        return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
    }

    /// Uniform phase on [0, 2*pi).
    double phase() {
        const std::uint64_t bits = engine_();
        return static_cast<double>(bits >> 11) * 0x1.0p-53 * 6.283185307179586476925286766559;
    }

    /// Standard real Gaussian via Box-Muller.
    double gaussian() {
        const double r = std::sqrt(-2.0 * std::log(uniform()));
        return r * std::cos(phase());
    }

    /// Circularly-symmetric complex Gaussian with unit variance, CN(0, 1).
    std::complex<double> cgaussian() {
        const double r = std::sqrt(-std::log(uniform()));
        const double p = phase();
        return {r * std::cos(p), r * std::sin(p)};
    }

  private:
    std::mt19937_64 engine_;
};

}  // namespace irssim
