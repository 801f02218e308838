#pragma once

// Helpers shared by the test binaries: scratch directories, random trajectories and brute-force
// reference implementations of the trajectory metrics. The oracles work on plain 4x4 matrices and
// never call into the library under test.

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "slambench/geometry/pose.hpp"
#include "slambench/metrics/trajectory.hpp"

namespace support {

namespace fs = std::filesystem;

inline const fs::path kPluginDir = SB_PLUGIN_DIR;
inline const fs::path kFixturePluginDir = SB_FIXTURE_PLUGIN_DIR;
inline const fs::path kFixtureDir = SB_FIXTURE_DATA_DIR;
inline const fs::path kToolDir = SB_TOOL_DIR;

inline fs::path plugin(const std::string& name) { return kPluginDir / ("lib" + name + ".so"); }
inline fs::path fixture_plugin(const std::string& name) { return kFixturePluginDir / ("libfixture-" + name + ".so"); }
inline fs::path dataset(const std::string& name) { return kFixtureDir / "datasets" / name; }

class TempDir {
 public:
  TempDir() {
    std::string tmpl = (fs::temp_directory_path() / "sbtest-XXXXXX").string();
    if (!mkdtemp(tmpl.data())) std::abort();
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline std::string slurp(const fs::path& p) {
  std::string out;
  if (FILE* f = std::fopen(p.c_str(), "rb")) {
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, f)) > 0) out.append(buf, n);
    std::fclose(f);
  }
  return out;
}

// Runs a shell command and returns (exit status, stdout).
inline std::pair<int, std::string> run_command(const std::string& cmd) {
  std::string out;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return {-1, out};
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, n);
  const int status = pclose(p);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

// ---------------------------------------------------------------------------------------------
// Random data

using Mat4 = Eigen::Matrix4d;

inline Eigen::Quaterniond random_rotation(std::mt19937_64& rng, double max_angle = M_PI) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> a(0.0, max_angle);
  Eigen::Vector3d axis(n(rng), n(rng), n(rng));
  axis.normalize();
  return Eigen::Quaterniond(Eigen::AngleAxisd(a(rng), axis));
}

inline slambench::geometry::Pose random_pose(std::mt19937_64& rng, double extent = 5.0) {
  std::uniform_real_distribution<double> u(-extent, extent);
  return {random_rotation(rng), Eigen::Vector3d(u(rng), u(rng), u(rng))};
}

inline Mat4 to_matrix(const slambench::geometry::Pose& p) {
  Mat4 m = Mat4::Identity();
  const Eigen::Quaterniond q = p.rotation();
  m.topLeftCorner<3, 3>() = q.toRotationMatrix();
  m.topRightCorner<3, 1>() = p.translation();
  return m;
}

// Rigid inverse written out explicitly.
inline Mat4 rigid_inverse(const Mat4& m) {
  Mat4 r = Mat4::Identity();
  const Eigen::Matrix3d rt = m.topLeftCorner<3, 3>().transpose();
  r.topLeftCorner<3, 3>() = rt;
  r.topRightCorner<3, 1>() = -rt * m.topRightCorner<3, 1>();
  return r;
}

using slambench::metrics::TrajectorySample;

// Strictly increasing timestamps with jitter; occasionally repeats a timestamp.
inline std::vector<TrajectorySample> random_trajectory(std::mt19937_64& rng, std::size_t n, std::uint64_t start_ns,
                                                       std::uint64_t step_ns, bool allow_duplicates = false) {
  std::vector<TrajectorySample> out;
  std::uniform_int_distribution<std::uint64_t> jitter(0, step_ns);
  std::bernoulli_distribution dup(0.05);
  std::uint64_t t = start_ns;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(allow_duplicates && i > 0 && dup(rng))) t += step_ns / 2 + jitter(rng);
    out.push_back({slambench::geometry::Timestamp::from_nanoseconds(t), random_pose(rng)});
  }
  return out;
}

// ---------------------------------------------------------------------------------------------
// Brute-force metric oracles

struct OraclePair {
  std::size_t gt;
  std::size_t est;
};

// For each estimate in order, scans every unused ground-truth sample and keeps the closest within
// the gate; on equal distance the lower index wins.
inline std::vector<OraclePair> brute_associate(const std::vector<TrajectorySample>& est,
                                               const std::vector<TrajectorySample>& gt, double max_dt) {
  const auto gate = static_cast<std::int64_t>(std::llround(max_dt * 1e9));
  std::vector<bool> used(gt.size(), false);
  std::vector<OraclePair> out;
  for (std::size_t e = 0; e < est.size(); ++e) {
    std::int64_t best = std::numeric_limits<std::int64_t>::max();
    std::size_t best_i = gt.size();
    for (std::size_t g = 0; g < gt.size(); ++g) {
      if (used[g]) continue;
      const auto a = static_cast<std::int64_t>(est[e].timestamp.total_nanoseconds());
      const auto b = static_cast<std::int64_t>(gt[g].timestamp.total_nanoseconds());
      const std::int64_t d = a > b ? a - b : b - a;
      if (d <= gate && d < best) {
        best = d;
        best_i = g;
      }
    }
    if (best_i < gt.size()) {
      used[best_i] = true;
      out.push_back({best_i, e});
    }
  }
  return out;
}

struct OracleStats {
  double rmse = 0, mean = 0, max = 0;
};

inline OracleStats oracle_stats(const std::vector<double>& e) {
  OracleStats s;
  if (e.empty()) return s;
  long double sum = 0, sq = 0;
  for (double v : e) {
    sum += v;
    sq += static_cast<long double>(v) * v;
    if (v > s.max) s.max = v;
  }
  s.mean = static_cast<double>(sum / e.size());
  s.rmse = static_cast<double>(std::sqrt(sq / e.size()));
  return s;
}

// Runtime ATE: S = Q1 P1^-1, e_i = |trans(Q_i) - trans(S P_i)|.
inline std::vector<double> oracle_ate_runtime(const std::vector<Mat4>& gt, const std::vector<Mat4>& est) {
  const Mat4 s = gt.front() * rigid_inverse(est.front());
  std::vector<double> out;
  for (std::size_t i = 0; i < gt.size(); ++i)
    out.push_back((gt[i].topRightCorner<3, 1>() - (s * est[i]).topRightCorner<3, 1>()).norm());
  return out;
}

// RPE: E_i = (Q_i^-1 Q_{i+d})^-1 (P_i^-1 P_{i+d}); translation norm and rotation angle.
inline std::pair<std::vector<double>, std::vector<double>> oracle_rpe(const std::vector<Mat4>& gt,
                                                                      const std::vector<Mat4>& est, std::size_t d) {
  std::vector<double> te, re;
  for (std::size_t i = 0; i + d < gt.size(); ++i) {
    const Mat4 dq = rigid_inverse(gt[i]) * gt[i + d];
    const Mat4 dp = rigid_inverse(est[i]) * est[i + d];
    const Mat4 e = rigid_inverse(dq) * dp;
    te.push_back(e.topRightCorner<3, 1>().norm());
    const double c = std::clamp((e.topLeftCorner<3, 3>().trace() - 1.0) / 2.0, -1.0, 1.0);
    re.push_back(std::acos(c));
  }
  return {te, re};
}

// O(n^2) dominance filter over (duration, error), both minimised.
inline std::vector<std::size_t> brute_pareto(const std::vector<std::pair<double, double>>& pts) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < pts.size() && !dominated; ++j)
      dominated = pts[j].first <= pts[i].first && pts[j].second <= pts[i].second &&
                  (pts[j].first < pts[i].first || pts[j].second < pts[i].second);
    if (!dominated) out.push_back(i);
  }
  return out;
}

}  // namespace support
