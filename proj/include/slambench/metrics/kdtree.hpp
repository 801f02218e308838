#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "slambench/geometry/pose.hpp"

namespace slambench::metrics {

// Exact nearest-neighbour index over a static 3-d point set. Rebuilding reuses storage, so a tree
// rebuilt on same-sized inputs does not allocate.
class KdTree {
 public:
  KdTree() = default;
  explicit KdTree(std::span<const geometry::Vec3> points) { build(points); }

  void build(std::span<const geometry::Vec3> points);
  void reserve(std::size_t n);

  struct Neighbor {
    std::size_t index;  // into the span passed to build()
    double distance_sq;
  };

  // Nearest point strictly closer than sqrt(max_distance_sq), if any.
  std::optional<Neighbor> nearest(const geometry::Vec3& q,
                                  double max_distance_sq = std::numeric_limits<double>::infinity()) const;

  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  std::size_t capacity_bytes() const;

 private:
  void build_range(std::size_t lo, std::size_t hi);
  void search(std::size_t lo, std::size_t hi, const geometry::Vec3& q, Neighbor& best) const;

  std::span<const geometry::Vec3> source_;  // valid during build only
  std::vector<geometry::Vec3> points_;      // reordered copy
  std::vector<std::uint32_t> index_;    // original index of points_[i]
  std::vector<std::uint8_t> axis_;      // split axis of the node whose median is i
};

}  // namespace slambench::metrics
