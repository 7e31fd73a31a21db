// SPDX-License-Identifier: Apache-2.0
//
// Part of irssim, a link-level simulator for reflecting-surface deployment
// studies in multi-user cells.

#pragma once

#include <cmath>
#include <stdexcept>

namespace irssim {

/// 3D Cartesian position / direction, in meters for positions.
struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    friend Vec3 operator+(const Vec3& a, const Vec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend Vec3 operator*(double s, const Vec3& v) { return {s * v.x, s * v.y, s * v.z}; }
    friend bool operator==(const Vec3& a, const Vec3& b) { return a.x == b.x && a.y == b.y && a.z == b.z; }
};

using Position = Vec3;

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }

/// Euclidean distance between two points.
inline double distance(const Position& a, const Position& b) { return norm(b - a); }

inline Vec3 normalized(const Vec3& v) {
    const double n = norm(v);
    if (n == 0.0) throw std::invalid_argument("cannot normalize a zero vector");
    return {v.x / n, v.y / n, v.z / n};
}

inline Vec3 unit_from_to(const Position& a, const Position& b) { return normalized(b - a); }

/// Right-handed orthonormal basis for a planar array with boresight `normal`:
/// u and v span the array plane, n is the boresight.
struct SurfaceBasis {
    Vec3 u, v, n;

    /// Components of a global direction expressed in this basis.
    Vec3 to_local(const Vec3& d) const { return {dot(u, d), dot(v, d), dot(n, d)}; }
};

inline SurfaceBasis basis_for_normal(const Vec3& normal) {
    const Vec3 n = normalized(normal);
    // Anchor the in-plane axes to the global z axis unless the surface is
    // (nearly) horizontal, in which case fall back to the x axis.
    Vec3 aux{0.0, 0.0, 1.0};
    if (std::abs(dot(n, aux)) > 0.99) aux = {1.0, 0.0, 0.0};
    const Vec3 u = normalized(cross(aux, n));
    const Vec3 v = cross(n, u);
    return {u, v, n};
}

}  // namespace irssim
