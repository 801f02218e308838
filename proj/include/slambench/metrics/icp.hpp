#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "slambench/geometry/pose.hpp"
#include "slambench/metrics/kdtree.hpp"

namespace slambench::metrics {

struct IcpParams {
  int max_iterations = 50;
  double tolerance = 1e-10;                 // stop once the residual improves by less (m)
  double max_correspondence_distance = 0.1;  // gate (m)
};

struct IcpResult {
  geometry::Pose transform;  // maps source into the target frame
  double residual = 0.0;     // RMS of gated correspondence distances, unmatched points count as the gate
  int iterations = 0;
  std::vector<double> residuals;  // residual before the first and after each accepted iteration
  std::size_t correspondences = 0;
};

// Point-to-point ICP. Each iteration matches every transformed source point to its nearest target
// point within the gate, solves a rigid alignment on the matches and applies it. An iteration that
// would raise the residual is discarded and ends the loop, so residuals never increase.
//
// Throws InvalidArgument for clouds with fewer than 3 points, NoCorrespondences when fewer than 3
// source points fall inside the gate at the start, and DegenerateGeometry from the alignment.
IcpResult icp(std::span<const geometry::Vec3> source, std::span<const geometry::Vec3> target, const IcpParams& params,
              const geometry::Pose& initial = geometry::Pose::identity());

// Same, against a prebuilt index of `target`. When `target_normals` is non-empty each match is
// replaced by the closest point on the target's local tangent plane, which removes the pull towards
// the target's sampling lattice on sparse depth images.
IcpResult icp(std::span<const geometry::Vec3> source, const KdTree& target_index,
              std::span<const geometry::Vec3> target, const IcpParams& params, const geometry::Pose& initial,
              std::span<const geometry::Vec3> target_normals = {});

struct RerResult {
  double mean = 0.0;  // mean est->gt nearest-neighbour distance after alignment (m)
  IcpResult alignment;
};

// Reconstruction error: aligns `est` onto `gt` with ICP starting from `initial`, then averages the
// distance from every aligned estimated point to its nearest ground-truth point.
RerResult rer(std::span<const geometry::Vec3> est, std::span<const geometry::Vec3> gt, const IcpParams& params,
              const geometry::Pose& initial = geometry::Pose::identity());

}  // namespace slambench::metrics
