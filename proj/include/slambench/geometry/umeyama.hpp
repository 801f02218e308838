#pragma once

#include <span>

#include "slambench/geometry/pose.hpp"

namespace slambench::geometry {

// Closed-form least-squares alignment of corresponded point sets: finds T minimizing
// sum ||dst_i - T(src_i)||^2. The rotation is determinant-corrected so reflections are never
// returned. When with_scale is false the returned scale is exactly 1.
//
// Throws SizeMismatch when the sets differ in length or hold fewer than 3 points, and
// DegenerateGeometry when the cross-covariance has rank < 2 (e.g. collinear points).
SimTransform umeyama_align(std::span<const Vec3> src, std::span<const Vec3> dst, bool with_scale);

}  // namespace slambench::geometry
