#include "slambench/runner/benchmark.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>

#include "slambench/error.hpp"
#include "slambench/io/payload.hpp"
#include "slambench/metrics/icp.hpp"
#include "slambench/metrics/timing.hpp"

namespace slambench::runner {

using geometry::Vec3;

void validate(const RunSpec& spec) {
  if (spec.algorithms.empty()) throw Error(Errc::InvalidConfig, "a run needs at least one algorithm");
  if (!std::filesystem::exists(spec.datafile))
    throw Error(Errc::InvalidConfig, "datafile " + spec.datafile.string() + " does not exist");
  if (!(spec.max_dt >= 0.0)) throw Error(Errc::InvalidConfig, "max_dt must be non-negative");
  if (spec.rpe_delta == 0) throw Error(Errc::InvalidConfig, "rpe delta must be >= 1");
  if (!(spec.rer_max_correspondence_distance > 0.0) || spec.rer_max_iterations < 1 || spec.rer_point_budget < 3)
    throw Error(Errc::InvalidConfig, "invalid reconstruction-error settings");
}

std::vector<std::string> resolve_algorithm_names(const RunSpec& spec) {
  std::vector<std::string> names;
  std::set<std::string> seen;
  for (const auto& a : spec.algorithms) {
    std::string n = a.name.empty() ? loader::algorithm_name_from_path(a.library) : a.name;
    if (!seen.insert(n).second)
      throw Error(Errc::NameCollision, "two algorithms are named '" + n + "'; rename one of the libraries");
    names.push_back(std::move(n));
  }
  return names;
}

template <typename F>
auto Benchmark::attributed(AlgorithmRun& run, F&& call) {
  if (memory_->kind() != metrics::MemoryProbeKind::AllocationHook) return call();
  const std::int64_t before = memory_->sample();
  auto result = call();
  run.attributed_bytes_ += memory_->sample() - before;
  return result;
}

Benchmark::Benchmark(RunSpec spec) : spec_(std::move(spec)) {
  validate(spec_);
  const auto names = resolve_algorithm_names(spec_);
  reader_ = std::make_unique<io::DatafileReader>(spec_.datafile);
  sensors_ = reader_->sensors();

  std::optional<std::uint32_t> gt_pose_sensor;
  bool have_cloud = false;
  while (auto f = reader_->next_gt_frame()) {
    const auto type = sensors_[f->sensor_index].type;
    if (type == io::SensorType::GtPose) {
      if (!gt_pose_sensor) gt_pose_sensor = f->sensor_index;
      if (f->sensor_index == *gt_pose_sensor) gt_.push_back({f->timestamp, io::decode_pose(f->payload)});
    } else if (type == io::SensorType::GtPointCloud && !have_cloud) {
      gt_cloud_ = io::decode_point_cloud(f->payload);
      have_cloud = true;
    }
  }
  if (spec_.forward_gt) gt_reader_ = std::make_unique<io::DatafileReader>(spec_.datafile);

  memory_ = metrics::make_memory_probe(spec_.memory_probe, &memory_note_);
  if (spec_.power_trace) power_ = std::make_unique<metrics::FileTracePowerProbe>(*spec_.power_trace);
  else power_ = std::make_unique<metrics::NonePowerProbe>();

  for (std::size_t i = 0; i < spec_.algorithms.size(); ++i) {
    const auto& a = spec_.algorithms[i];
    auto run = std::make_unique<AlgorithmRun>();
    auto& m = run->report_.metadata;
    m.datafile = spec_.datafile.string();
    m.algorithm = names[i];
    m.library = a.library.string();
    m.seed = spec_.seed;
    m.memory_probe = std::string(metrics::memory_probe_name(memory_->kind()));
    m.memory_probe_note = memory_note_;
    m.power_probe = std::string(power_->name());
    m.max_dt = spec_.max_dt;
    m.forward_gt = spec_.forward_gt;
    m.frame_limit = spec_.frame_limit;
    run->associator_.emplace(gt_, spec_.max_dt);
    try {
      run->handle_.emplace(loader::AlgorithmHandle::load(a.library));
      auto& h = *run->handle_;
      h.set_name(names[i]);
      h.new_configuration();
      for (const auto& [name, value] : a.parameters) h.set_parameter_from_string(name, value);
      for (const auto& p : h.parameters()) m.parameters[p.long_name] = loader::to_string(h.get_parameter(p.long_name));
      const bool ok = attributed(*run, [&] { return h.init(sensors_, spec_.ui_enabled); });
      if (!ok) fail(*run, "sb_init_slam_system rejected the sensor configuration");
    } catch (const Error& e) {
      fail(*run, e.what());
    }
    runs_.push_back(std::move(run));
  }
  start_ = std::chrono::steady_clock::now();
}

Benchmark::~Benchmark() = default;

std::vector<std::string> Benchmark::names() const {
  std::vector<std::string> n;
  for (const auto& r : runs_) n.push_back(r->name());
  return n;
}

void Benchmark::fail(AlgorithmRun& run, const std::string& why) {
  if (!run.report_.ok) return;
  run.report_.ok = false;
  run.report_.failure = why;
  if (run.handle_ && run.handle_->state() == loader::LifecycleState::Initialised) {
    try {
      run.handle_->clean();
    } catch (const Error&) {
    }
  }
}

std::optional<FrameStep> Benchmark::step() {
  if (exhausted_ || finished_) return std::nullopt;
  if (spec_.frame_limit && next_frame_ >= *spec_.frame_limit) {
    exhausted_ = true;
    return std::nullopt;
  }
  auto frame = reader_->next_frame();
  if (!frame) {
    exhausted_ = true;
    return std::nullopt;
  }

  FrameStep st;
  st.frame = next_frame_++;
  st.timestamp = frame->timestamp;
  st.rows.resize(runs_.size());
  st.estimates.resize(runs_.size());
  std::vector<bool> ready(runs_.size(), false);

  const auto deliver = [&](const io::FrameRecord& f) {
    const api::SBFrame view{f.timestamp, f.sensor_index, f.payload};
    for (std::size_t i = 0; i < runs_.size(); ++i) {
      auto& run = *runs_[i];
      if (run.failed()) continue;
      try {
        if (attributed(run, [&] { return run.handle_->update_frame(view); })) ready[i] = true;
      } catch (const Error& e) {
        fail(run, e.what());
      }
    }
  };

  if (gt_reader_) {
    while (true) {
      if (!pending_gt_) pending_gt_ = gt_reader_->next_gt_frame();
      if (!pending_gt_ || pending_gt_->timestamp > frame->timestamp) break;
      deliver(*pending_gt_);
      pending_gt_.reset();
    }
  }
  deliver(*frame);

  while (gt_reported_ < gt_.size() && gt_[gt_reported_].timestamp <= frame->timestamp)
    st.ground_truth.push_back(gt_[gt_reported_++]);

  for (std::size_t i = 0; i < runs_.size(); ++i) {
    auto& run = *runs_[i];
    if (run.failed() || !ready[i]) continue;
    auto& h = *run.handle_;
    try {
      const auto before = metrics::timing_update_counts(h.config());
      const auto timing = attributed(run, [&] { return metrics::time_process(h); });
      if (!timing.ok) {
        fail(run, "sb_process_once reported an unrecoverable failure at frame " + std::to_string(st.frame));
        continue;
      }
      const bool outputs = h.update_outputs();

      MetricRow row;
      row.frame = st.frame;
      row.timestamp = st.timestamp;
      row.duration = timing.seconds;
      row.phases = metrics::phase_breakdown(h.config(), before);
      row.memory = memory_->kind() == metrics::MemoryProbeKind::AllocationHook ? run.attributed_bytes_
                                                                                 : memory_->sample();
      for (const auto* ch : h.config().outputs_of_kind(loader::OutputKind::MemoryCounter))
        if (const auto* b = std::get_if<std::uint64_t>(&ch->value)) row.plugin_memory = row.plugin_memory.value_or(0) + *b;
      for (const auto* ch : h.config().outputs_of_kind(loader::OutputKind::TrackingStatus)) {
        if (const auto* s = std::get_if<api::TrackingStatus>(&ch->value)) row.status = *s;
        break;
      }
      row.power = power_->sample(std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count());

      const auto* pose = h.config().output(api::kPoseChannel);
      if (outputs && pose && pose->updates > run.pose_updates_ && pose->timestamp) {
        run.pose_updates_ = pose->updates;
        const auto& p = std::get<geometry::Pose>(pose->value);
        const auto sample = EstimateSample::from_pose(*pose->timestamp, p);
        run.report_.trajectory.push_back(sample);
        st.estimates[i] = sample;
        if (const auto g = run.associator_->match(*pose->timestamp)) {
          const metrics::AssociatedPair pair{gt_[*g], {*pose->timestamp, p},
                                             std::abs(geometry::difference_seconds(gt_[*g].timestamp, *pose->timestamp))};
          if (!run.alignment_) run.alignment_ = metrics::runtime_alignment(pair);
          row.ate = (pair.gt.pose.translation() - (*run.alignment_ * p).translation()).norm();
          run.pairs_.push_back(pair);
        }
      }
      run.report_.rows.push_back(row);
      st.rows[i] = std::move(row);
    } catch (const Error& e) {
      fail(run, e.what());
    }
  }
  return st;
}

api::ParamValue Benchmark::set_parameter(std::size_t algorithm, std::string_view name, const api::ParamValue& value) {
  auto& run = *runs_.at(algorithm);
  if (finished_ || !run.handle_ || run.failed())
    throw Error(Errc::LifecycleViolation, "algorithm '" + run.name() + "' is not running");
  auto old = run.handle_->set_parameter(name, value);
  const auto* spec = run.handle_->config().find_parameter(name);
  run.report_.metadata.parameters[spec->long_name] = loader::to_string(run.handle_->get_parameter(name));
  return old;
}

void Benchmark::offline_metrics(AlgorithmRun& run) {
  auto& s = run.report_.summary;
  const auto note = [&](const std::string& what, const Error& e) { s.notes.push_back(what + ": " + e.what()); };
  try {
    const auto rigid = metrics::ate_aligned(run.pairs_, metrics::AlignMode::Rigid);
    s.ate_rigid_rmse = rigid.stats.rmse;
    const auto sim = metrics::ate_aligned(run.pairs_, metrics::AlignMode::Similarity);
    s.ate_similarity_rmse = sim.stats.rmse;
    s.similarity_scale = sim.alignment.scale;
  } catch (const Error& e) {
    note("aligned ATE", e);
  }
  try {
    const auto r = metrics::rpe(run.pairs_, spec_.rpe_delta);
    s.rpe_trans_rmse = r.translation.rmse;
    s.rpe_rot_rmse = r.rotation.rmse;
  } catch (const Error& e) {
    note("RPE", e);
  }
  if (!spec_.compute_rer || gt_cloud_.empty() || !run.handle_) return;
  const std::vector<float>* cloud = nullptr;
  for (const auto* ch : run.handle_->config().outputs_of_kind(loader::OutputKind::PointCloud))
    if (const auto* v = std::get_if<std::vector<float>>(&ch->value); v && v->size() >= 9) {
      cloud = v;
      break;
    }
  if (!cloud) return;
  std::vector<Vec3> est;
  est.reserve(cloud->size() / 3);
  for (std::size_t i = 0; i + 2 < cloud->size(); i += 3) est.emplace_back((*cloud)[i], (*cloud)[i + 1], (*cloud)[i + 2]);
  if (est.size() > spec_.rer_point_budget) {
    std::vector<Vec3> kept;
    kept.reserve(spec_.rer_point_budget);
    std::mt19937_64 rng(spec_.seed);
    std::sample(est.begin(), est.end(), std::back_inserter(kept), spec_.rer_point_budget, rng);
    est = std::move(kept);
  }
  try {
    metrics::IcpParams params;
    params.max_iterations = spec_.rer_max_iterations;
    params.max_correspondence_distance = spec_.rer_max_correspondence_distance;
    s.rer = metrics::rer(est, gt_cloud_, params, run.alignment_.value_or(geometry::Pose::identity())).mean;
  } catch (const Error& e) {
    note("RER", e);
  }
}

const std::vector<RunReport>& Benchmark::finish() {
  if (finished_) return reports_;
  for (auto& r : runs_) {
    auto& run = *r;
    if (!run.failed() && run.handle_ && run.handle_->state() == loader::LifecycleState::Initialised) {
      try {
        if (!attributed(run, [&] { return run.handle_->clean(); }))
          run.report_.summary.notes.push_back("sb_clean_slam_system returned false");
      } catch (const Error& e) {
        fail(run, e.what());
      }
    }
    summarize_rows(run.report_.rows, run.report_.summary);
    offline_metrics(run);
    reports_.push_back(run.report_);
  }
  finished_ = true;
  return reports_;
}

void write_table_header(std::ostream& out, const std::vector<std::string>& names) {
  out << "frame timestamp";
  for (const auto& n : names) out << ' ' << n << "_duration " << n << "_memory " << n << "_ATE";
  out << '\n';
}

void write_table_row(std::ostream& out, const FrameStep& step) {
  char buf[64];
  out << step.frame << ' ' << geometry::to_string(step.timestamp);
  for (const auto& row : step.rows) {
    if (!row) {
      out << " nan nan nan";
      continue;
    }
    std::snprintf(buf, sizeof buf, " %.9f", row->duration);
    out << buf;
    if (row->memory) out << ' ' << *row->memory;
    else out << " nan";
    if (row->ate) {
      std::snprintf(buf, sizeof buf, " %.10f", *row->ate);
      out << buf;
    } else {
      out << " nan";
    }
  }
  out << '\n';
}

std::vector<RunReport> run_benchmark(const RunSpec& spec, std::ostream* table) {
  Benchmark bench(spec);
  if (table) write_table_header(*table, bench.names());
  while (auto st = bench.step()) {
    if (table && std::any_of(st->rows.begin(), st->rows.end(), [](const auto& r) { return r.has_value(); })) {
      write_table_row(*table, *st);
      table->flush();
    }
  }
  return bench.finish();
}

}  // namespace slambench::runner
