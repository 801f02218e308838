#include "slambench/metrics/icp.hpp"

#include <algorithm>
#include <cmath>

#include "slambench/error.hpp"
#include "slambench/geometry/umeyama.hpp"

namespace slambench::metrics {

using geometry::Pose;
using geometry::Vec3;

namespace {

struct Matches {
  std::vector<Vec3> src;  // transformed source points
  std::vector<Vec3> dst;
  double residual = 0.0;
};

void match(std::span<const Vec3> source, const KdTree& index, std::span<const Vec3> target,
           std::span<const Vec3> normals, const Pose& t, double gate, Matches& out) {
  out.src.clear();
  out.dst.clear();
  const double gate_sq = gate * gate;
  double sum = 0.0;
  for (const Vec3& s : source) {
    const Vec3 p = t.apply(s);
    const auto nn = index.nearest(p, gate_sq);
    if (!nn) {
      sum += gate_sq;
      continue;
    }
    Vec3 q = target[nn->index];
    double d2 = nn->distance_sq;
    if (!normals.empty()) {
      const Vec3& n = normals[nn->index];
      q = p - n * n.dot(p - q);
      d2 = (p - q).squaredNorm();
    }
    sum += std::min(d2, gate_sq);
    out.src.push_back(p);
    out.dst.push_back(q);
  }
  out.residual = std::sqrt(sum / static_cast<double>(source.size()));
}

}  // namespace

IcpResult icp(std::span<const Vec3> source, const KdTree& target_index, std::span<const Vec3> target,
              const IcpParams& params, const Pose& initial, std::span<const Vec3> target_normals) {
  if (source.size() < 3 || target.size() < 3) throw Error(Errc::InvalidArgument, "ICP needs at least 3 points per cloud");
  if (!target_normals.empty() && target_normals.size() != target.size())
    throw Error(Errc::SizeMismatch, "one normal per target point required");
  if (!(params.max_correspondence_distance > 0.0) || params.max_iterations < 1 || !(params.tolerance >= 0.0))
    throw Error(Errc::InvalidArgument, "invalid ICP parameters");

  IcpResult result;
  result.transform = initial;
  Matches cur, next;
  match(source, target_index, target, target_normals, initial, params.max_correspondence_distance, cur);
  if (cur.src.size() < 3)
    throw Error(Errc::NoCorrespondences, "only " + std::to_string(cur.src.size()) +
                                             " source points lie within the correspondence gate");
  result.residual = cur.residual;
  result.residuals.push_back(cur.residual);

  while (result.iterations < params.max_iterations) {
    ++result.iterations;
    const Pose delta = geometry::umeyama_align(cur.src, cur.dst, false).rigid();
    const Pose candidate = delta * result.transform;
    match(source, target_index, target, target_normals, candidate, params.max_correspondence_distance, next);
    if (next.residual > cur.residual) break;
    const double improvement = cur.residual - next.residual;
    result.transform = candidate;
    result.residual = next.residual;
    result.residuals.push_back(next.residual);
    std::swap(cur, next);
    if (improvement < params.tolerance || cur.src.size() < 3) break;
  }
  result.correspondences = cur.src.size();
  return result;
}

IcpResult icp(std::span<const Vec3> source, std::span<const Vec3> target, const IcpParams& params,
              const Pose& initial) {
  const KdTree index(target);
  return icp(source, index, target, params, initial);
}

RerResult rer(std::span<const Vec3> est, std::span<const Vec3> gt, const IcpParams& params, const Pose& initial) {
  if (est.empty() || gt.empty()) throw Error(Errc::InvalidArgument, "RER needs non-empty clouds");
  const KdTree index(gt);
  RerResult out;
  out.alignment = icp(est, index, gt, params, initial);
  double sum = 0.0;
  for (const Vec3& p : est) sum += std::sqrt(index.nearest(out.alignment.transform.apply(p))->distance_sq);
  out.mean = sum / static_cast<double>(est.size());
  return out;
}

}  // namespace slambench::metrics
