#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "slambench/geometry/pose.hpp"
#include "slambench/geometry/timestamp.hpp"

namespace slambench::metrics {

using geometry::Pose;
using geometry::Timestamp;

inline constexpr double kDefaultMaxDt = 0.02;

struct TrajectorySample {
  Timestamp timestamp;
  Pose pose;
};

struct AssociatedPair {
  TrajectorySample gt;
  TrajectorySample est;
  double dt = 0.0;  // |t_gt - t_est| in seconds
};

// Incremental form of associate(): feed estimates in timestamp order. Each ground-truth sample is
// used at most once; ties go to the earlier ground-truth sample.
class Associator {
 public:
  Associator(std::span<const TrajectorySample> gt, double max_dt = kDefaultMaxDt);

  // Index of the ground-truth sample paired with an estimate at `t`, if any.
  std::optional<std::size_t> match(Timestamp t);

 private:
  std::span<const TrajectorySample> gt_;
  std::vector<bool> used_;
  std::int64_t max_ns_;
};

// Greedy nearest-timestamp matching over `est` in order; pairs with dt > max_dt are dropped.
std::vector<AssociatedPair> associate(std::span<const TrajectorySample> est, std::span<const TrajectorySample> gt,
                                      double max_dt = kDefaultMaxDt);

struct ErrorStats {
  std::vector<double> errors;
  double rmse = 0.0;
  double mean = 0.0;
  double max = 0.0;
};

ErrorStats error_stats(std::vector<double> errors);

// Runtime ATE: the first pair fixes S = Q1 * P1^-1, then e_i = |t(Q_i) - t(S * P_i)|.
// Throws EmptyPairs.
ErrorStats ate_runtime(std::span<const AssociatedPair> pairs);

// Aligns the first-pair estimate onto its ground truth, as used by ate_runtime.
Pose runtime_alignment(const AssociatedPair& first);

enum class AlignMode { Rigid, Similarity };

struct AlignedAte {
  ErrorStats stats;
  geometry::SimTransform alignment;  // maps estimated positions onto ground truth
};

// Offline ATE over translations after a closed-form alignment. Throws DegenerateGeometry and
// SizeMismatch (fewer than 3 pairs).
AlignedAte ate_aligned(std::span<const AssociatedPair> pairs, AlignMode mode);

struct RpeResult {
  ErrorStats translation;  // meters
  ErrorStats rotation;     // radians
};

// E_i = (Q_i^-1 Q_{i+d})^-1 (P_i^-1 P_{i+d}). Throws InsufficientPairs when pairs.size() <= delta.
RpeResult rpe(std::span<const AssociatedPair> pairs, std::size_t delta = 1);
// Time-based delta: each i is paired with the j > i whose ground-truth time offset is nearest to
// `interval` seconds.
RpeResult rpe_time(std::span<const AssociatedPair> pairs, double interval);

}  // namespace slambench::metrics
