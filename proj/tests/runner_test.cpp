#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <regex>
#include <sstream>

#include "slambench/error.hpp"
#include "slambench/ingest/synthetic.hpp"
#include "slambench/io/datafile.hpp"
#include "slambench/io/payload.hpp"
#include "slambench/runner/benchmark.hpp"
#include "slambench/runner/report.hpp"
#include "support/support.hpp"

using namespace slambench;
using runner::RunSpec;

namespace {

std::filesystem::path synthetic(const support::TempDir& tmp, std::uint32_t frames = 20) {
  ingest::SyntheticSceneConfig cfg;
  cfg.frame_count = frames;
  cfg.width = 32;
  cfg.height = 24;
  cfg.intrinsics = {20.f, 20.f, 15.5f, 11.5f, {}};
  cfg.cloud_spacing = 0.05;
  const auto out = tmp / "s.slam";
  ingest::generate_synthetic(cfg, out);
  return out;
}

RunSpec two_algorithm_spec(const std::filesystem::path& data) {
  RunSpec spec;
  spec.datafile = data;
  spec.algorithms.push_back({support::plugin("gt-replay"), "", {}});
  spec.algorithms.push_back({support::plugin("noisy-replay"), "", {{"st", "0.01"}, {"seed", "7"}}});
  spec.forward_gt = true;
  return spec;
}

std::vector<std::string> split(const std::string& s, char sep = ' ') {
  std::vector<std::string> out;
  std::string tok;
  std::istringstream in(s);
  while (std::getline(in, tok, sep)) out.push_back(tok);
  return out;
}

std::vector<std::string> lines(const std::string& s) { return split(s, '\n'); }

template <typename F>
Errc error_code(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return Errc::InvalidArgument;
}

const std::string kLoader = (support::kToolDir / "sb_loader").string();

}  // namespace

TEST_CASE("benchmark table layout") {
  support::TempDir tmp;
  const auto data = synthetic(tmp);
  std::ostringstream table;
  const auto reports = runner::run_benchmark(two_algorithm_spec(data), &table);
  const auto out = lines(table.str());
  REQUIRE(out.size() == 21);
  CHECK(out[0] ==
        "frame timestamp gt-replay_duration gt-replay_memory gt-replay_ATE "
        "noisy-replay_duration noisy-replay_memory noisy-replay_ATE");
  const auto header = split(out[0]);
  CHECK(header.front() == "frame");
  CHECK(std::count_if(header.begin(), header.end(), [](const std::string& h) { return h.ends_with("_ATE"); }) == 2);

  // frame, timestamp, then duration / memory / ATE per algorithm; ATE as in `3665 ... 0.0088654254`.
  const std::regex row(R"(^\d+ \d+\.\d{9}( \d+\.\d{9} -?\d+ \d+\.\d{10}){2}$)");
  std::uint64_t last = 0;
  for (std::size_t i = 1; i < out.size(); ++i) {
    INFO(out[i]);
    CHECK(std::regex_match(out[i], row));
    const auto cols = split(out[i]);
    REQUIRE(cols.size() == header.size());
    const auto frame = std::stoull(cols[0]);
    if (i > 1) CHECK(frame > last);
    last = frame;
    CHECK(std::stod(cols[4]) <= 1e-9);  // gt-replay
  }

  // Rows line up with the reports.
  REQUIRE(reports.size() == 2);
  for (std::size_t a = 0; a < 2; ++a) {
    REQUIRE(reports[a].rows.size() == 20);
    for (std::size_t i = 0; i < 20; ++i) {
      const auto cols = split(out[i + 1]);
      CHECK(std::stoull(cols[0]) == reports[a].rows[i].frame);
      CHECK(cols[1] == geometry::to_string(reports[a].rows[i].timestamp));
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.10f", *reports[a].rows[i].ate);
      CHECK(cols[4 + 3 * a] == buf);
    }
  }
}

TEST_CASE("rows with no estimate print nan") {
  std::ostringstream out;
  runner::FrameStep step;
  step.frame = 3665;
  step.timestamp = {12, 5};
  runner::MetricRow r;
  r.duration = 0.25;
  r.ate = 0.0088654254;
  step.rows = {std::nullopt, r};
  runner::write_table_row(out, step);
  CHECK(out.str() == "3665 12.000000005 nan nan nan 0.250000000 nan 0.0088654254\n");
}

TEST_CASE("reports round-trip and summaries recompute from rows") {
  support::TempDir tmp;
  const auto data = synthetic(tmp);
  auto spec = two_algorithm_spec(data);
  const auto trace = tmp / "power.txt";
  std::ofstream(trace) << "0 5\n100 15\n";
  spec.power_trace = trace;
  const auto reports = runner::run_benchmark(spec);

  runner::export_reports(reports, tmp / "r.json", runner::ReportFormat::Json);
  CHECK(runner::import_reports(tmp / "r.json") == reports);

  runner::export_reports(reports, tmp / "r.csv", runner::ReportFormat::Csv);
  const auto csv = lines(support::slurp(tmp / "r.csv"));
  CHECK(csv[0] == "algorithm,frame,timestamp,duration,memory,plugin_memory,ate,power,status,phases");
  CHECK(csv.size() == 1 + reports[0].rows.size() + reports[1].rows.size());
  for (std::size_t i = 1; i < csv.size(); ++i) CHECK(split(csv[i], ',').size() >= 9);

  for (const auto& rep : reports) {
    INFO(rep.metadata.algorithm);
    const auto& s = rep.summary;
    double dur = 0, sq = 0, sum = 0, mx = 0, power = 0;
    std::int64_t peak = std::numeric_limits<std::int64_t>::min();
    for (const auto& r : rep.rows) {
      dur += r.duration;
      sum += *r.ate;
      sq += *r.ate * *r.ate;
      mx = std::max(mx, *r.ate);
      peak = std::max(peak, *r.memory);
      REQUIRE(r.power);
      power += *r.power;
      CHECK(*r.power >= 5.0);
      CHECK(*r.power <= 15.0);
    }
    const double n = static_cast<double>(rep.rows.size());
    CHECK(s.frames == rep.rows.size());
    CHECK(std::abs(s.total_duration - dur) <= 1e-12);
    CHECK(std::abs(*s.mean_fps - n / dur) <= 1e-12 * (n / dur));
    CHECK(std::abs(*s.ate_mean - sum / n) <= 1e-12);
    CHECK(std::abs(*s.ate_rmse - std::sqrt(sq / n)) <= 1e-12);
    CHECK(*s.ate_max == mx);
    CHECK(*s.peak_memory == peak);
    CHECK(std::abs(*s.mean_power - power / n) <= 1e-12);
    CHECK(rep.metadata.power_probe == "file");
    CHECK(rep.metadata.memory_probe == "alloc");
    CHECK(rep.trajectory.size() == rep.rows.size());
  }
  CHECK(reports[1].metadata.parameters.at("sigma-trans") == "0.01");
  CHECK(reports[1].metadata.parameters.at("seed") == "7");
}

TEST_CASE("repeated runs give identical metrics") {
  support::TempDir tmp;
  const auto data = synthetic(tmp);
  const auto a = runner::run_benchmark(two_algorithm_spec(data));
  const auto b = runner::run_benchmark(two_algorithm_spec(data));
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(a[k].trajectory == b[k].trajectory);
    REQUIRE(a[k].rows.size() == b[k].rows.size());
    for (std::size_t i = 0; i < a[k].rows.size(); ++i) CHECK(a[k].rows[i].ate == b[k].rows[i].ate);
    CHECK(a[k].summary.ate_rigid_rmse == b[k].summary.ate_rigid_rmse);
    CHECK(a[k].summary.rpe_trans_rmse == b[k].summary.rpe_trans_rmse);
  }
}

TEST_CASE("one failing algorithm does not stop the others") {
  support::TempDir tmp;
  const auto data = synthetic(tmp);
  RunSpec spec = two_algorithm_spec(data);
  spec.algorithms.push_back({support::fixture_plugin("missing-process"), "", {}});
  spec.algorithms.push_back({support::plugin("icp-odometry"), "icp", {{"stride", "1000"}}});  // out of bounds
  spec.algorithms.push_back({support::fixture_plugin("features"), "", {{"no-pose", "true"}}});
  const auto reports = runner::run_benchmark(spec);
  REQUIRE(reports.size() == 5);
  CHECK(reports[0].ok);
  CHECK(reports[1].ok);
  CHECK(reports[0].rows.size() == 20);
  CHECK(reports[1].rows.size() == 20);
  CHECK_FALSE(reports[2].ok);
  CHECK(reports[2].failure.find("MissingSymbol") != std::string::npos);
  CHECK_FALSE(reports[3].ok);
  CHECK(reports[3].failure.find("ParameterOutOfBounds") != std::string::npos);
  CHECK_FALSE(reports[4].ok);
  CHECK(reports[4].failure.find("ContractViolation") != std::string::npos);

  // The same library twice under distinct names runs as two instances.
  RunSpec twice;
  twice.datafile = data;
  twice.algorithms.push_back({support::plugin("icp-odometry"), "", {}});
  twice.algorithms.push_back({support::plugin("icp-odometry"), "icp-coarse", {{"s", "8"}}});
  const auto both = runner::run_benchmark(twice);
  CHECK(both[0].ok);
  CHECK(both[1].ok);
  CHECK(both[1].metadata.algorithm == "icp-coarse");

  // A plugin that rejects the sensor table fails: gt-replay needs a ground-truth sensor.
  const auto imu_only = tmp / "imu.slam";
  {
    io::DatafileWriter w(imu_only, {io::SensorDescriptor::imu(100.f)});
    for (std::uint32_t i = 0; i < 3; ++i) w.write_in_frame({{1 + i, 0}, 0, io::encode_imu({})});
    w.close();
  }
  RunSpec mixed;
  mixed.datafile = imu_only;
  mixed.algorithms.push_back({support::plugin("gt-replay"), "", {}});
  mixed.algorithms.push_back({support::fixture_plugin("features"), "", {}});
  const auto m = runner::run_benchmark(mixed);
  CHECK_FALSE(m[0].ok);
  CHECK(m[0].failure.find("init") != std::string::npos);
  CHECK(m[1].ok);
  CHECK(m[1].rows.size() == 3);
}

TEST_CASE("run spec validation") {
  support::TempDir tmp;
  const auto data = synthetic(tmp);
  RunSpec spec;
  spec.datafile = data;
  CHECK(error_code([&] { runner::validate(spec); }) == Errc::InvalidConfig);  // no algorithms
  spec.algorithms.push_back({support::plugin("gt-replay"), "", {}});
  runner::validate(spec);
  spec.algorithms.push_back({support::plugin("gt-replay"), "", {}});
  CHECK(error_code([&] { runner::resolve_algorithm_names(spec); }) == Errc::NameCollision);
  spec.algorithms[1].name = "replay2";
  CHECK(runner::resolve_algorithm_names(spec) == std::vector<std::string>{"gt-replay", "replay2"});
  spec.max_dt = -1;
  CHECK(error_code([&] { runner::validate(spec); }) == Errc::InvalidConfig);
  spec.max_dt = 0.02;
  spec.datafile = tmp / "absent.slam";
  CHECK(error_code([&] { runner::validate(spec); }) == Errc::InvalidConfig);
}

TEST_CASE("stepping, frame limit and live parameters") {
  support::TempDir tmp;
  const auto data = synthetic(tmp);
  RunSpec spec = two_algorithm_spec(data);
  spec.frame_limit = 25;  // counts input frames; the file has 20
  runner::Benchmark bench(spec);
  CHECK(bench.names() == std::vector<std::string>{"gt-replay", "noisy-replay"});
  CHECK(bench.ground_truth().size() == 20);
  CHECK_FALSE(bench.ground_truth_cloud().empty());
  std::size_t steps = 0;
  while (auto step = bench.step()) {
    ++steps;
    REQUIRE(step->rows.size() == 2);
    if (steps == 10) {
      CHECK(std::get<double>(bench.set_parameter(1, "sigma-trans", 0.0)) == 0.01);
      CHECK(error_code([&] { bench.set_parameter(1, "seed", 3); }) == Errc::ParameterNotLive);
    }
  }
  CHECK(steps == 20);
  CHECK(bench.exhausted());
  const auto& reports = bench.finish();
  CHECK(&bench.finish() == &reports);
  // After the change the estimate sits on the anchor again, which is the ground truth.
  CHECK(*reports[1].rows.back().ate <= 1e-9);

  spec.frame_limit = 5;
  runner::Benchmark limited(spec);
  while (limited.step()) {
  }
  CHECK(limited.frames_delivered() == 5);
  CHECK(limited.finish()[0].rows.size() == 5);
}

TEST_CASE("sb_loader command line") {
  support::TempDir tmp;
  const auto data = synthetic(tmp);
  const std::string base = kLoader + " -i " + data.string() + " -load " + support::plugin("gt-replay").string() +
                           " -load " + support::plugin("noisy-replay").string() + " --forward-gt";

  const auto [code, out] = support::run_command(base + " --noisy-replay-sigma-trans 0.01 --noisy-replay-s 3 -o " +
                                                (tmp / "out.csv").string() + " --format csv");
  CHECK(code == 0);
  const auto rows = lines(out);
  REQUIRE(rows.size() == 21);
  CHECK(rows[0].starts_with("frame timestamp gt-replay_duration"));
  CHECK(rows[0].ends_with("noisy-replay_ATE"));
  CHECK(lines(support::slurp(tmp / "out.csv")).size() == 41);

  CHECK(support::run_command(base + " --frame-limit 4").second.size() < out.size());
  CHECK(lines(support::run_command(base + " --frame-limit 4").second).size() == 5);

  // Usage errors.
  CHECK(support::run_command(base + " --noisy-replay-bogus 1 2>/dev/null").first == 2);
  CHECK(support::run_command(base + " --noisy-replay-st 99 2>/dev/null").first != 0);
  CHECK(support::run_command(kLoader + " -load " + support::plugin("gt-replay").string() + " 2>/dev/null").first == 2);
  CHECK(support::run_command(base + " -load " + support::plugin("gt-replay").string() + " 2>/dev/null").first == 2);

  // A failing algorithm makes the exit status non-zero but the others still report.
  const auto [fcode, fout] =
      support::run_command(base + " -load " + support::fixture_plugin("missing-process").string() + " 2>/dev/null");
  CHECK(fcode == 1);
  CHECK(lines(fout).size() == 21);

  // Declared parameters show up in --help.
  const auto help = support::run_command(kLoader + " -load " + support::plugin("icp-odometry").string() + " --help").second;
  CHECK(help.find("--icp-odometry-stride") != std::string::npos);
  CHECK(help.find("live") != std::string::npos);
}
