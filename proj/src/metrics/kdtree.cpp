#include "slambench/metrics/kdtree.hpp"

#include <algorithm>
#include <numeric>

#include "slambench/error.hpp"

namespace slambench::metrics {

using geometry::Vec3;

namespace {
constexpr std::size_t kLeafSize = 8;
}

void KdTree::reserve(std::size_t n) {
  points_.reserve(n);
  index_.reserve(n);
  axis_.reserve(n);
}

std::size_t KdTree::capacity_bytes() const {
  return points_.capacity() * sizeof(Vec3) + index_.capacity() * sizeof(std::uint32_t) + axis_.capacity();
}

void KdTree::build(std::span<const Vec3> points) {
  if (points.size() > std::numeric_limits<std::uint32_t>::max())
    throw Error(Errc::InvalidArgument, "kd-tree holds at most 2^32-1 points");
  source_ = points;
  index_.resize(points.size());
  std::iota(index_.begin(), index_.end(), 0u);
  axis_.assign(points.size(), 0);
  build_range(0, points.size());
  points_.resize(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) points_[i] = points[index_[i]];
  source_ = {};
}

void KdTree::build_range(std::size_t lo, std::size_t hi) {
  if (hi - lo <= kLeafSize) return;
  Vec3 mn = source_[index_[lo]], mx = mn;
  for (std::size_t i = lo + 1; i < hi; ++i) {
    mn = mn.cwiseMin(source_[index_[i]]);
    mx = mx.cwiseMax(source_[index_[i]]);
  }
  Eigen::Index axis;
  (mx - mn).maxCoeff(&axis);
  const std::size_t mid = lo + (hi - lo) / 2;

  std::nth_element(index_.begin() + static_cast<std::ptrdiff_t>(lo), index_.begin() + static_cast<std::ptrdiff_t>(mid),
                   index_.begin() + static_cast<std::ptrdiff_t>(hi),
                   [&](std::uint32_t a, std::uint32_t b) { return source_[a][axis] < source_[b][axis]; });
  axis_[mid] = static_cast<std::uint8_t>(axis);
  build_range(lo, mid);
  build_range(mid + 1, hi);
}

void KdTree::search(std::size_t lo, std::size_t hi, const Vec3& q, Neighbor& best) const {
  if (hi - lo <= kLeafSize) {
    for (std::size_t i = lo; i < hi; ++i) {
      const double d = (points_[i] - q).squaredNorm();
      if (d < best.distance_sq) best = {i, d};
    }
    return;
  }
  const std::size_t mid = lo + (hi - lo) / 2;
  const int axis = axis_[mid];
  const double d = (points_[mid] - q).squaredNorm();
  if (d < best.distance_sq) best = {mid, d};
  const double diff = q[axis] - points_[mid][axis];
  if (diff < 0.0) {
    search(lo, mid, q, best);
    if (diff * diff < best.distance_sq) search(mid + 1, hi, q, best);
  } else {
    search(mid + 1, hi, q, best);
    if (diff * diff < best.distance_sq) search(lo, mid, q, best);
  }
}

std::optional<KdTree::Neighbor> KdTree::nearest(const Vec3& q, double max_distance_sq) const {
  Neighbor best{points_.size(), max_distance_sq};
  search(0, points_.size(), q, best);
  if (best.index == points_.size()) return std::nullopt;
  return Neighbor{index_[best.index], best.distance_sq};
}

}  // namespace slambench::metrics
