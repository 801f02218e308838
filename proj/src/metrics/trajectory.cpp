#include "slambench/metrics/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>

#include "slambench/error.hpp"
#include "slambench/geometry/umeyama.hpp"

namespace slambench::metrics {

using geometry::Vec3;

Associator::Associator(std::span<const TrajectorySample> gt, double max_dt)
    : gt_(gt), used_(gt.size(), false), max_ns_(std::llround(max_dt * 1e9)) {
  if (!(max_dt >= 0.0)) throw Error(Errc::InvalidArgument, "max_dt must be non-negative");
}

std::optional<std::size_t> Associator::match(Timestamp t) {
  const auto first_not_before =
      std::lower_bound(gt_.begin(), gt_.end(), t, [](const TrajectorySample& s, Timestamp v) { return s.timestamp < v; });
  const auto pivot = static_cast<std::size_t>(first_not_before - gt_.begin());

  std::optional<std::size_t> best;
  std::int64_t best_dt = 0;
  // Walk left over earlier samples, then right; both walks stop at the gate.
  for (std::size_t i = pivot; i-- > 0;) {
    const std::int64_t dt = difference_ns(t, gt_[i].timestamp);
    if (dt > max_ns_) break;
    if (!used_[i]) {
      best = i;
      best_dt = dt;
      // Among unused duplicates of this timestamp, prefer the earliest.
      for (std::size_t k = i; k-- > 0 && gt_[k].timestamp == gt_[i].timestamp;)
        if (!used_[k]) best = k;
      break;
    }
  }
  for (std::size_t i = pivot; i < gt_.size(); ++i) {
    const std::int64_t dt = difference_ns(gt_[i].timestamp, t);
    if (dt > max_ns_ || (best && dt >= best_dt)) break;
    if (!used_[i]) {
      // Equal-time duplicates to the right come first in file order; keep the earliest unused one.
      best = i;
      best_dt = dt;
      break;
    }
  }
  if (best) used_[*best] = true;
  return best;
}

std::vector<AssociatedPair> associate(std::span<const TrajectorySample> est, std::span<const TrajectorySample> gt,
                                      double max_dt) {
  Associator assoc(gt, max_dt);
  std::vector<AssociatedPair> pairs;
  for (const auto& e : est)
    if (const auto g = assoc.match(e.timestamp))
      pairs.push_back({gt[*g], e, std::abs(difference_seconds(gt[*g].timestamp, e.timestamp))});
  return pairs;
}

ErrorStats error_stats(std::vector<double> errors) {
  ErrorStats s;
  s.errors = std::move(errors);
  if (s.errors.empty()) return s;
  double sum = 0.0, sq = 0.0;
  for (double e : s.errors) {
    sum += e;
    sq += e * e;
    s.max = std::max(s.max, e);
  }
  const auto n = static_cast<double>(s.errors.size());
  s.mean = sum / n;
  s.rmse = std::sqrt(sq / n);
  return s;
}

Pose runtime_alignment(const AssociatedPair& first) { return first.gt.pose * first.est.pose.inverse(); }

ErrorStats ate_runtime(std::span<const AssociatedPair> pairs) {
  if (pairs.empty()) throw Error(Errc::EmptyPairs, "ATE needs at least one associated pair");
  const Pose s = runtime_alignment(pairs.front());
  std::vector<double> errors;
  errors.reserve(pairs.size());
  for (const auto& p : pairs)
    errors.push_back((p.gt.pose.translation() - (s * p.est.pose).translation()).norm());
  return error_stats(std::move(errors));
}

AlignedAte ate_aligned(std::span<const AssociatedPair> pairs, AlignMode mode) {
  std::vector<Vec3> est, gt;
  est.reserve(pairs.size());
  gt.reserve(pairs.size());
  for (const auto& p : pairs) {
    est.push_back(p.est.pose.translation());
    gt.push_back(p.gt.pose.translation());
  }
  AlignedAte out;
  out.alignment = geometry::umeyama_align(est, gt, mode == AlignMode::Similarity);
  std::vector<double> errors;
  errors.reserve(pairs.size());
  for (std::size_t i = 0; i < est.size(); ++i) errors.push_back((gt[i] - out.alignment.apply(est[i])).norm());
  out.stats = error_stats(std::move(errors));
  return out;
}

namespace {

RpeResult rpe_from_indices(std::span<const AssociatedPair> pairs,
                           const std::vector<std::pair<std::size_t, std::size_t>>& idx) {
  std::vector<double> te, re;
  te.reserve(idx.size());
  re.reserve(idx.size());
  for (const auto& [i, j] : idx) {
    const Pose dq = pairs[i].gt.pose.inverse() * pairs[j].gt.pose;
    const Pose dp = pairs[i].est.pose.inverse() * pairs[j].est.pose;
    const Pose e = dq.inverse() * dp;
    te.push_back(e.translation().norm());
    re.push_back(e.angle());
  }
  return {error_stats(std::move(te)), error_stats(std::move(re))};
}

}  // namespace

RpeResult rpe(std::span<const AssociatedPair> pairs, std::size_t delta) {
  if (delta == 0) throw Error(Errc::InvalidArgument, "RPE delta must be >= 1");
  if (pairs.size() <= delta)
    throw Error(Errc::InsufficientPairs, "RPE with delta " + std::to_string(delta) + " needs more than " +
                                             std::to_string(delta) + " pairs, got " + std::to_string(pairs.size()));
  std::vector<std::pair<std::size_t, std::size_t>> idx;
  for (std::size_t i = 0; i + delta < pairs.size(); ++i) idx.emplace_back(i, i + delta);
  return rpe_from_indices(pairs, idx);
}

RpeResult rpe_time(std::span<const AssociatedPair> pairs, double interval) {
  if (!(interval > 0.0)) throw Error(Errc::InvalidArgument, "RPE interval must be positive");
  std::vector<std::pair<std::size_t, std::size_t>> idx;
  for (std::size_t i = 0; i + 1 < pairs.size(); ++i) {
    const Timestamp t0 = pairs[i].gt.timestamp;
    std::size_t best = i + 1;
    double best_gap = std::abs(difference_seconds(pairs[best].gt.timestamp, t0) - interval);
    for (std::size_t j = i + 2; j < pairs.size(); ++j) {
      const double gap = std::abs(difference_seconds(pairs[j].gt.timestamp, t0) - interval);
      if (gap < best_gap) {
        best = j;
        best_gap = gap;
      } else if (difference_seconds(pairs[j].gt.timestamp, t0) > interval) {
        break;
      }
    }
    // Pairs whose partner falls short of the interval at the end of the trajectory are skipped.
    if (difference_seconds(pairs.back().gt.timestamp, t0) + 1e-12 < interval) break;
    idx.emplace_back(i, best);
  }
  if (idx.empty()) throw Error(Errc::InsufficientPairs, "no pair spans the requested RPE interval");
  return rpe_from_indices(pairs, idx);
}

}  // namespace slambench::metrics
