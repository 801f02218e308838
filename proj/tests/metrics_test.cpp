#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "slambench/error.hpp"
#include "slambench/ingest/synthetic.hpp"
#include "slambench/io/datafile.hpp"
#include "slambench/io/payload.hpp"
#include "slambench/loader/algorithm.hpp"
#include "slambench/metrics/icp.hpp"
#include "slambench/metrics/kdtree.hpp"
#include "slambench/metrics/probes.hpp"
#include "slambench/metrics/timing.hpp"
#include "slambench/metrics/trajectory.hpp"
#include "support/support.hpp"

using namespace slambench;
using geometry::Pose;
using geometry::Vec3;
using metrics::AssociatedPair;
using metrics::TrajectorySample;
using support::Mat4;

namespace {

constexpr double kTol = 1e-9;

std::vector<AssociatedPair> pairs_from(const std::vector<TrajectorySample>& gt, const std::vector<TrajectorySample>& est) {
  std::vector<AssociatedPair> out;
  for (std::size_t i = 0; i < gt.size(); ++i) out.push_back({gt[i], est[i], 0.0});
  return out;
}

// An estimate that roughly follows gt: gt perturbed, then expressed in another frame.
std::vector<TrajectorySample> perturbed(std::mt19937_64& rng, const std::vector<TrajectorySample>& gt, double sigma) {
  std::normal_distribution<double> n(0.0, sigma);
  const Pose frame = support::random_pose(rng);
  std::vector<TrajectorySample> out;
  for (const auto& s : gt) {
    const Pose noise(Eigen::Quaterniond(Eigen::AngleAxisd(n(rng), Vec3::UnitZ())), Vec3(n(rng), n(rng), n(rng)));
    out.push_back({s.timestamp, frame * s.pose * noise});
  }
  return out;
}

void check_stats(const metrics::ErrorStats& got, const std::vector<double>& expected) {
  REQUIRE(got.errors.size() == expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) CHECK(std::abs(got.errors[i] - expected[i]) <= kTol);
  const auto o = support::oracle_stats(expected);
  CHECK(std::abs(got.rmse - o.rmse) <= kTol);
  CHECK(std::abs(got.mean - o.mean) <= kTol);
  CHECK(std::abs(got.max - o.max) <= kTol);
}

bool close(double a, double b) { return std::abs(a - b) <= kTol; }

std::vector<Vec3> random_cloud(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  std::vector<Vec3> pts;
  for (std::size_t i = 0; i < n; ++i) pts.emplace_back(u(rng), u(rng), 0.5 * u(rng));
  return pts;
}

}  // namespace

TEST_CASE("associate matches a brute-force scan") {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> gate(0.001, 0.05);
  for (int trial = 0; trial < 500; ++trial) {
    const auto gt = support::random_trajectory(rng, 40 + trial % 30, 1'000'000'000, 33'000'000, true);
    const auto est = support::random_trajectory(rng, 30 + trial % 40, 1'000'000'000 + trial * 1'000'000, 33'000'000, true);
    const double max_dt = gate(rng);
    const auto got = metrics::associate(est, gt, max_dt);
    const auto want = support::brute_associate(est, gt, max_dt);
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(got[i].gt.timestamp == gt[want[i].gt].timestamp);
      CHECK(got[i].est.timestamp == est[want[i].est].timestamp);
      CHECK(close(got[i].dt, std::abs(geometry::difference_seconds(gt[want[i].gt].timestamp, est[want[i].est].timestamp))));
    }
  }
}

TEST_CASE("runtime ATE and RPE match matrix oracles") {
  std::mt19937_64 rng(202);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 5 + trial % 60;
    const auto gt = support::random_trajectory(rng, n, 0, 33'000'000);
    const auto est = trial % 2 ? perturbed(rng, gt, 0.05) : support::random_trajectory(rng, n, 0, 33'000'000);
    const auto pairs = pairs_from(gt, est);
    std::vector<Mat4> g, e;
    for (std::size_t i = 0; i < n; ++i) {
      g.push_back(support::to_matrix(gt[i].pose));
      e.push_back(support::to_matrix(est[i].pose));
    }
    check_stats(metrics::ate_runtime(pairs), support::oracle_ate_runtime(g, e));
    for (std::size_t d : {std::size_t{1}, std::size_t{3}}) {
      if (n <= d) continue;
      const auto r = metrics::rpe(pairs, d);
      const auto [te, re] = support::oracle_rpe(g, e, d);
      check_stats(r.translation, te);
      REQUIRE(r.rotation.errors.size() == re.size());
      for (std::size_t i = 0; i < re.size(); ++i) CHECK(std::abs(r.rotation.errors[i] - re[i]) <= 1e-7);
    }
  }
}

TEST_CASE("invariances") {
  std::mt19937_64 rng(303);
  for (int trial = 0; trial < 200; ++trial) {
    const auto gt = support::random_trajectory(rng, 30, 0, 33'000'000);
    const auto est = perturbed(rng, gt, 0.1);
    const auto base = pairs_from(gt, est);

    // The estimate's choice of world frame does not change runtime ATE.
    const Pose w = support::random_pose(rng);
    auto moved = base;
    for (auto& p : moved) p.est.pose = w * p.est.pose;
    const auto a0 = metrics::ate_runtime(base);
    const auto a1 = metrics::ate_runtime(moved);
    for (std::size_t i = 0; i < a0.errors.size(); ++i) CHECK(close(a0.errors[i], a1.errors[i]));

    // Neither trajectory's world frame changes RPE.
    auto both = base;
    const Pose wg = support::random_pose(rng);
    for (auto& p : both) {
      p.est.pose = w * p.est.pose;
      p.gt.pose = wg * p.gt.pose;
    }
    const auto r0 = metrics::rpe(base, 2);
    const auto r1 = metrics::rpe(both, 2);
    CHECK(close(r0.translation.rmse, r1.translation.rmse));
    CHECK(close(r0.rotation.rmse, r1.rotation.rmse));

    // Similarity-aligned ATE ignores the estimate's scale.
    const double s = std::uniform_real_distribution<double>(0.1, 10.0)(rng);
    auto scaled = base;
    for (auto& p : scaled) p.est.pose = Pose(p.est.pose.rotation(), s * p.est.pose.translation());
    const auto s0 = metrics::ate_aligned(base, metrics::AlignMode::Similarity);
    const auto s1 = metrics::ate_aligned(scaled, metrics::AlignMode::Similarity);
    CHECK(close(s0.stats.rmse, s1.stats.rmse));
    CHECK(std::abs(s1.alignment.scale * s - s0.alignment.scale) <= 1e-9 * s0.alignment.scale);
  }
}

TEST_CASE("offline alignment recovers an exact transform") {
  std::mt19937_64 rng(404);
  const auto gt = support::random_trajectory(rng, 50, 0, 33'000'000);
  const Pose w = support::random_pose(rng);
  auto pairs = pairs_from(gt, gt);
  for (auto& p : pairs) p.est.pose = w * Pose(p.gt.pose.rotation(), 0.5 * p.gt.pose.translation());
  CHECK(metrics::ate_aligned(pairs, metrics::AlignMode::Similarity).stats.rmse < 1e-9);
  CHECK(metrics::ate_aligned(pairs, metrics::AlignMode::Rigid).stats.rmse > 0.1);
  for (auto& p : pairs) p.est.pose = w * p.gt.pose;
  CHECK(metrics::ate_aligned(pairs, metrics::AlignMode::Rigid).stats.rmse < 1e-9);
  CHECK(metrics::ate_runtime(pairs).rmse < 1e-9);
}

TEST_CASE("metric error paths") {
  CHECK_THROWS_AS(metrics::ate_runtime({}), Error);
  try {
    metrics::ate_runtime({});
  } catch (const Error& e) {
    CHECK(e.code() == Errc::EmptyPairs);
  }
  std::mt19937_64 rng(5);
  const auto gt = support::random_trajectory(rng, 3, 0, 33'000'000);
  const auto pairs = pairs_from(gt, gt);
  try {
    metrics::rpe(pairs, 3);
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::InsufficientPairs);
  }
  try {
    metrics::ate_aligned(std::span(pairs).first(2), metrics::AlignMode::Rigid);
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::SizeMismatch);
  }
}

TEST_CASE("time-based RPE picks the nearest interval partner") {
  std::vector<TrajectorySample> gt;
  for (int i = 0; i < 20; ++i)
    gt.push_back({geometry::Timestamp::from_nanoseconds(i * 100'000'000ull), Pose::from_translation({double(i), 0, 0})});
  auto est = gt;
  for (auto& s : est) s.pose = Pose::from_translation(1.5 * s.pose.translation());
  const auto r = metrics::rpe_time(pairs_from(gt, est), 0.3);  // three samples apart
  REQUIRE(r.translation.errors.size() == 17);
  for (double e : r.translation.errors) CHECK(std::abs(e - 1.5) < 1e-12);
}

TEST_CASE("kd-tree nearest neighbour equals brute force") {
  std::mt19937_64 rng(606);
  std::uniform_real_distribution<double> u(-2, 2);
  metrics::KdTree tree;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Vec3> pts;
    const int n = 1 + trial * 97;
    for (int i = 0; i < n; ++i) pts.emplace_back(u(rng), u(rng), u(rng));
    if (trial % 5 == 0) pts.insert(pts.end(), pts.begin(), pts.begin() + n / 2);  // duplicates
    tree.build(pts);
    for (int q = 0; q < 200; ++q) {
      const Vec3 query(u(rng), u(rng), u(rng));
      const double gate = q % 2 ? 0.3 * 0.3 : std::numeric_limits<double>::infinity();
      double best = std::numeric_limits<double>::infinity();
      for (const auto& p : pts) best = std::min(best, (p - query).squaredNorm());
      const auto got = tree.nearest(query, gate);
      if (best < gate) {
        REQUIRE(got);
        CHECK(got->distance_sq == best);
        CHECK((pts[got->index] - query).squaredNorm() == best);
      } else {
        CHECK_FALSE(got);
      }
    }
  }
  tree.build({});
  CHECK_FALSE(tree.nearest(Vec3::Zero()));
}

TEST_CASE("ICP recovers small rigid perturbations with non-increasing residuals") {
  std::mt19937_64 rng(707);
  std::uniform_real_distribution<double> angle(-5.0 * M_PI / 180.0, 5.0 * M_PI / 180.0);
  std::uniform_real_distribution<double> shift(-0.05 / std::sqrt(3.0), 0.05 / std::sqrt(3.0));
  metrics::IcpParams params;
  params.max_correspondence_distance = 0.25;
  params.max_iterations = 200;
  for (int trial = 0; trial < 50; ++trial) {
    const auto target = random_cloud(rng, 500 + trial * 20);
    const Vec3 axis = Vec3::Random().normalized();
    const Pose truth(Eigen::Quaterniond(Eigen::AngleAxisd(angle(rng), axis)), Vec3(shift(rng), shift(rng), shift(rng)));
    std::vector<Vec3> source;
    for (const auto& p : target) source.push_back(truth.inverse().apply(p));
    const auto r = metrics::icp(source, target, params);
    const Mat4 got = r.transform.matrix();
    const Mat4 want = truth.matrix();
    INFO("trial " << trial);
    CHECK((got - want).cwiseAbs().maxCoeff() <= 1e-4);
    for (std::size_t i = 1; i < r.residuals.size(); ++i) CHECK(r.residuals[i] <= r.residuals[i - 1]);
    CHECK(r.residual < 1e-6);
  }
}

TEST_CASE("ICP rejects unusable input") {
  metrics::IcpParams params;
  std::vector<Vec3> two{Vec3::Zero(), Vec3::UnitX()};
  try {
    metrics::icp(two, two, params);
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::InvalidArgument);
  }
  std::mt19937_64 rng(1);
  const auto a = random_cloud(rng, 100);
  auto b = a;
  for (auto& p : b) p += Vec3(10, 0, 0);
  try {
    metrics::icp(a, b, params);
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NoCorrespondences);
  }
}

TEST_CASE("reconstruction error") {
  std::mt19937_64 rng(808);
  const auto gt = random_cloud(rng, 4000);
  metrics::IcpParams params;
  params.max_correspondence_distance = 0.2;

  // Identical geometry in a slightly different frame: alignment removes it entirely.
  const Pose off(Eigen::Quaterniond(Eigen::AngleAxisd(0.03, Vec3::UnitY())), Vec3(0.02, -0.01, 0.0));
  std::vector<Vec3> est;
  for (std::size_t i = 0; i < gt.size(); i += 2) est.push_back(off.apply(gt[i]));
  CHECK(metrics::rer(est, gt, params).mean < 1e-6);

  // Points displaced off the gt samples by a fixed amount along z: the error is the mean
  // nearest-neighbour distance, checked against brute force at the recovered alignment.
  est.clear();
  for (std::size_t i = 0; i < gt.size(); i += 4) est.push_back(gt[i] + Vec3(0.001, 0.0, 0.0));
  const auto r = metrics::rer(est, gt, params);
  double sum = 0;
  for (const auto& p : est) {
    const Vec3 q = r.alignment.transform.apply(p);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& g : gt) best = std::min(best, (g - q).norm());
    sum += best;
  }
  CHECK(std::abs(r.mean - sum / est.size()) < 1e-12);
  CHECK(r.mean < 0.001 + 1e-9);
}

TEST_CASE("allocation hook measures a 64 MiB allocation within 5%") {
  REQUIRE(metrics::allocation_hook_available());
  auto h = loader::AlgorithmHandle::load(support::fixture_plugin("alloc64"));
  h.new_configuration();
  metrics::AllocationHookProbe probe;
  const auto before = probe.sample();
  REQUIRE(h.init({io::SensorDescriptor::imu(100.f)}, false));
  const auto used = probe.sample() - before;
  const double want = 64.0 * 1024 * 1024;
  MESSAGE("measured " << used << " bytes");
  CHECK(used >= want);
  CHECK(used <= want * 1.05);
  h.clean();
  CHECK(std::abs(probe.sample() - before) < want * 0.05);
}

TEST_CASE("memory probes") {
  CHECK(metrics::parse_memory_probe("rss") == metrics::MemoryProbeKind::ResidentSet);
  CHECK(metrics::memory_probe_name(metrics::parse_memory_probe("alloc")) == "alloc");
  CHECK_THROWS_AS(metrics::parse_memory_probe("heap"), Error);
  CHECK(metrics::resident_set_bytes() > 0);
  std::string note;
  const auto p = metrics::make_memory_probe(metrics::MemoryProbeKind::AllocationHook, &note);
  CHECK(p->kind() == metrics::MemoryProbeKind::AllocationHook);
  CHECK(note.empty());

  // A plugin that keeps growing is seen growing by at least its allocation per frame.
  auto g = loader::AlgorithmHandle::load(support::fixture_plugin("grower"));
  g.new_configuration();
  REQUIRE(g.init({io::SensorDescriptor::imu(100.f)}, false));
  const auto imu = io::encode_imu({});
  std::int64_t last = p->sample();
  for (int i = 0; i < 5; ++i) {
    REQUIRE(g.update_frame({{1u + static_cast<std::uint32_t>(i), 0}, 0, imu}));
    REQUIRE(g.process_once());
    REQUIRE(g.update_outputs());
    const auto now = p->sample();
    CHECK(now - last >= 1024 * 1024);
    last = now;
    CHECK(std::get<std::uint64_t>(g.config().output("map")->value) == std::uint64_t(i + 1) << 20);
  }
  g.clean();
}

TEST_CASE("icp-odometry memory is flat once warmed up") {
  support::TempDir tmp;
  ingest::SyntheticSceneConfig cfg;
  cfg.frame_count = 12;
  cfg.emit_point_cloud = false;
  ingest::generate_synthetic(cfg, tmp / "s.slam");
  io::DatafileReader reader(tmp / "s.slam");
  auto h = loader::AlgorithmHandle::load(support::plugin("icp-odometry"));
  h.new_configuration();
  REQUIRE(h.init(reader.sensors(), false));
  metrics::AllocationHookProbe probe;
  std::vector<std::int64_t> samples;
  samples.reserve(64);  // the probe sees this process's own allocations too
  while (auto f = reader.next_frame()) {
    if (!h.update_frame({f->timestamp, f->sensor_index, f->payload})) continue;
    REQUIRE(h.process_once());
    samples.push_back(probe.sample());
  }
  REQUIRE(samples.size() == 11);
  for (std::size_t i = 3; i < samples.size(); ++i) CHECK(samples[i] == samples[2]);
  h.clean();
}

TEST_CASE("process timing") {
  auto h = loader::AlgorithmHandle::load(support::fixture_plugin("sleeper"));
  h.new_configuration();
  REQUIRE(h.init({io::SensorDescriptor::imu(100.f)}, false));
  const auto imu = io::encode_imu({});
  for (int ms : {10, 30}) {
    h.set_parameter("sleep-ms", ms);
    REQUIRE(h.update_frame({{1, 0}, 0, imu}));
    const auto t = metrics::time_process(h);
    CHECK(t.ok);
    CHECK(t.seconds >= ms / 1000.0);
    CHECK(t.seconds < ms / 1000.0 + 0.05);
  }
  h.clean();
}

TEST_CASE("power trace interpolation") {
  metrics::FileTracePowerProbe p({{1.0, 2.0}, {3.0, 6.0}, {4.0, 6.0}});
  CHECK(*p.sample(0.0) == 2.0);
  CHECK(*p.sample(2.0) == doctest::Approx(4.0));
  CHECK(*p.sample(2.5) == doctest::Approx(5.0));
  CHECK(*p.sample(3.5) == 6.0);
  CHECK(*p.sample(10.0) == 6.0);
  CHECK_FALSE(metrics::NonePowerProbe{}.sample(1.0));

  support::TempDir tmp;
  std::ofstream(tmp / "trace.txt") << "# seconds watts\n0 10\n\n2 20\n";
  CHECK(*metrics::FileTracePowerProbe(tmp / "trace.txt").sample(0.5) == doctest::Approx(12.5));
  std::ofstream(tmp / "bad.txt") << "0 10\nfoo\n";
  try {
    metrics::FileTracePowerProbe(tmp / "bad.txt");
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::UnparseableLine);
  }
  try {
    metrics::FileTracePowerProbe(tmp / "missing.txt");
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::ProbeUnavailable);
  }
}
