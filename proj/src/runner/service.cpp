#include "slambench/runner/service.hpp"

#include <httplib.h>

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <deque>
#include <future>
#include <map>
#include <mutex>
#include <random>
#include <thread>

#include "slambench/error.hpp"

namespace slambench::runner {

using nlohmann::json;

namespace {

std::string param_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  return v.dump();
}

json param_json(const api::ParamValue& v) {
  return std::visit([](const auto& x) { return json(x); }, v);
}

json pose_row(double t, const geometry::Pose& p) {
  const auto& q = p.rotation();
  const auto& x = p.translation();
  return json::array({t, x.x(), x.y(), x.z(), q.w(), q.x(), q.y(), q.z()});
}

int http_status(Errc c) {
  switch (c) {
    case Errc::SessionNotFound: return 404;
    case Errc::ParameterNotLive:
    case Errc::LifecycleViolation: return 409;
    default: return 400;
  }
}

}  // namespace

RunSpec runspec_from_json(const json& body, const ServiceConfig& config) {
  try {
    RunSpec spec;
    if (body.contains("datafile")) {
      spec.datafile = body.at("datafile").get<std::string>();
    } else if (body.contains("dataset")) {
      const auto want = body.at("dataset").get<std::string>();
      for (const auto& d : config.datasets)
        if (d.filename() == want || d.stem() == want || d == want) spec.datafile = d;
      if (spec.datafile.empty()) throw Error(Errc::InvalidConfig, "unknown dataset '" + want + "'");
    } else if (config.datasets.size() == 1) {
      spec.datafile = config.datasets.front();
    } else {
      throw Error(Errc::InvalidConfig, "runspec needs 'datafile' or 'dataset'");
    }
    for (const auto& a : body.at("algorithms")) {
      AlgorithmSpec alg;
      const auto lib = a.is_string() ? a.get<std::string>() : a.at("library").get<std::string>();
      alg.library = lib;
      for (const auto& l : config.libraries)
        if (loader::algorithm_name_from_path(l) == lib) alg.library = l;
      if (alg.library == lib && !std::filesystem::exists(alg.library))
        throw Error(Errc::InvalidConfig, "unknown algorithm '" + lib + "'");
      if (a.is_object()) {
        alg.name = a.value("name", std::string());
        if (a.contains("parameters"))
          for (const auto& [k, v] : a.at("parameters").items()) alg.parameters.emplace_back(k, param_text(v));
      }
      spec.algorithms.push_back(std::move(alg));
    }
    if (body.contains("frame_limit") && !body.at("frame_limit").is_null())
      spec.frame_limit = body.at("frame_limit").get<std::uint64_t>();
    spec.max_dt = body.value("max_dt", spec.max_dt);
    if (body.contains("memory_probe"))
      spec.memory_probe = metrics::parse_memory_probe(body.at("memory_probe").get<std::string>());
    if (body.contains("power_trace") && !body.at("power_trace").is_null())
      spec.power_trace = body.at("power_trace").get<std::string>();
    spec.forward_gt = body.value("forward_gt", false);
    spec.ui_enabled = body.value("ui_enabled", false);
    spec.seed = body.value("seed", std::uint64_t{0});
    spec.compute_rer = body.value("compute_rer", true);
    validate(spec);
    return spec;
  } catch (const json::exception& e) {
    throw Error(Errc::InvalidConfig, std::string("malformed runspec: ") + e.what());
  }
}

json to_json(const io::DatafileSummary& s) {
  json sensors = json::array();
  for (std::size_t i = 0; i < s.sensors.size(); ++i) {
    const auto& d = s.sensors[i];
    json j = {{"index", i}, {"type", io::sensor_type_name(d.type)}, {"frames", s.frames_per_sensor.at(i)}};
    if (io::is_camera(d.type)) {
      j["width"] = d.width;
      j["height"] = d.height;
      j["intrinsics"] = {d.intrinsics.fx, d.intrinsics.fy, d.intrinsics.cx, d.intrinsics.cy};
    }
    if (d.rate_hz > 0.f) j["rate_hz"] = d.rate_hz;
    sensors.push_back(std::move(j));
  }
  return {{"path", s.path.string()},
          {"name", s.path.filename().string()},
          {"sensors", std::move(sensors)},
          {"gt_frames", s.gt_frame_count},
          {"input_frames", s.in_frame_count},
          {"duration", s.duration_seconds()}};
}

json describe_parameters(const loader::AlgorithmHandle& h) {
  json params = json::array();
  for (const auto& p : h.parameters()) {
    json j = {{"short_name", p.short_name},
              {"long_name", p.long_name},
              {"description", p.description},
              {"type", loader::value_type_name(p.type)},
              {"default", param_json(p.default_value)},
              {"value", param_json(h.get_parameter(p.long_name))},
              {"live", p.live}};
    j["bounds"] = p.bounds ? json::array({p.bounds->first, p.bounds->second}) : json(nullptr);
    params.push_back(std::move(j));
  }
  return params;
}

// ---------------------------------------------------------------------------------------------

namespace {

enum class Mode { Running, Paused, Stepping, Done, Failed };

const char* mode_name(Mode m) {
  switch (m) {
    case Mode::Running: return "RUNNING";
    case Mode::Paused: return "PAUSED";
    case Mode::Stepping: return "STEPPING";
    case Mode::Done: return "DONE";
    case Mode::Failed: return "FAILED";
  }
  return "UNKNOWN";
}

struct Command {
  enum Kind { Step, Play, Pause, SetParam, Cloud, Stop } kind;
  json args;
  std::promise<json> reply;
};

class Session {
 public:
  Session(std::string id, std::unique_ptr<Benchmark> bench, std::size_t point_budget)
      : id_(std::move(id)), bench_(std::move(bench)), point_budget_(point_budget) {
    names_ = bench_->names();
    for (std::size_t i = 0; i < names_.size(); ++i) {
      est_[names_[i]] = json::array();
      rows_[names_[i]] = json::array();
      const auto& run = bench_->run(i);
      params_[names_[i]] = run.handle() ? describe_parameters(*run.handle()) : json::array();
      if (run.failed()) failures_[names_[i]] = run.report().failure;
    }
    worker_ = std::thread([this] { loop(); });
  }

  ~Session() {
    post(Command::Stop, {});
    if (worker_.joinable()) worker_.join();
  }

  const std::string& id() const { return id_; }

  std::future<json> post(Command::Kind kind, json args) {
    Command c{kind, std::move(args), {}};
    auto f = c.reply.get_future();
    {
      std::lock_guard lock(queue_mu_);
      queue_.push_back(std::move(c));
    }
    queue_cv_.notify_all();
    return f;
  }

  json snapshot() const {
    std::lock_guard lock(state_mu_);
    json out = {{"id", id_},
                {"mode", mode_name(mode_)},
                {"frame", frame_},
                {"algorithms", names_},
                {"trajectories", {{"gt", gt_}, {"est", est_}}},
                {"rows", rows_},
                {"params", params_},
                {"audit", audit_},
                {"failures", failures_},
                {"failure", failure_}};
    if (!reports_.is_null()) out["reports"] = reports_;
    return out;
  }

  // Messages from index `from`; blocks up to `wait` for new ones. `terminal` reports whether the
  // session has finished and everything has been handed out.
  std::vector<std::string> messages(std::size_t from, std::chrono::milliseconds wait, bool& terminal) const {
    std::unique_lock lock(state_mu_);
    state_cv_.wait_for(lock, wait, [&] { return messages_.size() > from || terminal_locked(); });
    std::vector<std::string> out;
    for (std::size_t i = from; i < messages_.size(); ++i) out.push_back(messages_[i]);
    terminal = terminal_locked() && from + out.size() == messages_.size();
    return out;
  }

 private:
  bool terminal_locked() const { return mode_ == Mode::Done || mode_ == Mode::Failed || stopping_; }

  void emit_locked(json msg) {
    messages_.push_back(msg.dump());
    state_cv_.notify_all();
  }

  void set_mode(Mode m) {
    std::lock_guard lock(state_mu_);
    if (mode_ == m) return;
    mode_ = m;
    emit_locked({{"type", "status-changed"}, {"mode", mode_name(m)}, {"frame", frame_}});
  }

  Mode mode() const {
    std::lock_guard lock(state_mu_);
    return mode_;
  }

  // Returns false once the stream is exhausted.
  bool advance() {
    std::optional<FrameStep> st;
    try {
      st = bench_->step();
    } catch (const Error& e) {
      std::lock_guard lock(state_mu_);
      failure_ = e.what();
      mode_ = Mode::Failed;
      emit_locked({{"type", "status-changed"}, {"mode", "FAILED"}, {"frame", frame_}, {"error", failure_}});
      return false;
    }
    if (!st) {
      const auto& reports = bench_->finish();
      std::lock_guard lock(state_mu_);
      reports_ = json::array();
      bool any_ok = false;
      for (const auto& r : reports) {
        reports_.push_back(to_json(r));
        any_ok = any_ok || r.ok;
      }
      mode_ = any_ok ? Mode::Done : Mode::Failed;
      emit_locked({{"type", "status-changed"}, {"mode", mode_name(mode_)}, {"frame", frame_}});
      return false;
    }
    std::lock_guard lock(state_mu_);
    frame_ = bench_->frames_delivered();
    for (const auto& g : st->ground_truth) gt_.push_back(pose_row(g.timestamp.to_seconds(), g.pose));
    for (std::size_t i = 0; i < names_.size(); ++i) {
      const auto& name = names_[i];
      if (const auto& e = st->estimates[i]) {
        auto row = pose_row(e->timestamp.to_seconds(), e->pose());
        est_[name].push_back(row);
        emit_locked({{"type", "pose-appended"}, {"algorithm", name}, {"frame", st->frame}, {"pose", row}});
      }
      if (const auto& r = st->rows[i]) {
        auto row = runner::to_json(*r);
        rows_[name].push_back(row);
        emit_locked({{"type", "row-appended"}, {"algorithm", name}, {"row", row}});
      }
      const auto& run = bench_->run(i);
      if (run.failed() && !failures_.contains(name)) {
        failures_[name] = run.report().failure;
        emit_locked({{"type", "status-changed"}, {"algorithm", name}, {"mode", "FAILED"}, {"frame", st->frame},
                     {"error", run.report().failure}});
      }
    }
    return true;
  }

  std::size_t algorithm_index(const json& args) const {
    if (args.contains("algorithm") && !args.at("algorithm").is_null()) {
      const auto want = args.at("algorithm").get<std::string>();
      for (std::size_t i = 0; i < names_.size(); ++i)
        if (names_[i] == want) return i;
      throw Error(Errc::InvalidArgument, "session has no algorithm '" + want + "'");
    }
    if (names_.size() != 1) throw Error(Errc::InvalidArgument, "several algorithms loaded; name one");
    return 0;
  }

  json set_param(const json& args) {
    const std::size_t i = algorithm_index(args);
    const auto name = args.at("name").get<std::string>();
    const json& v = args.at("value");
    const auto* run_handle = bench_->run(i).handle();
    if (!run_handle) throw Error(Errc::LifecycleViolation, "algorithm '" + names_[i] + "' is not running");
    const auto* spec = run_handle->config().find_parameter(name);
    if (!spec) throw Error(Errc::UnknownParameter, names_[i] + " has no parameter '" + name + "'");
    api::ParamValue value;
    if (v.is_string()) value = loader::parse_parameter_value(*spec, v.get<std::string>());
    else if (v.is_boolean()) value = v.get<bool>();
    else if (v.is_number_integer()) value = v.get<int>();
    else if (v.is_number()) value = v.get<double>();
    else throw Error(Errc::InvalidArgument, "parameter values are numbers, booleans or strings");
    const auto old = bench_->set_parameter(i, name, value);
    const auto now = run_handle->get_parameter(name);
    std::lock_guard lock(state_mu_);
    json entry = {{"frame", frame_}, {"algorithm", names_[i]}, {"name", spec->long_name},
                  {"old", param_json(old)}, {"new", param_json(now)}};
    audit_.push_back(entry);
    params_[names_[i]] = describe_parameters(*run_handle);
    emit_locked({{"type", "param-changed"}, {"entry", entry}});
    return entry;
  }

  json cloud(const json& args) {
    std::vector<float> pts;
    std::string source;
    if (args.value("ground_truth", false)) {
      for (const auto& p : bench_->ground_truth_cloud()) pts.insert(pts.end(), {float(p.x()), float(p.y()), float(p.z())});
      source = "gt";
    } else {
      const std::size_t i = algorithm_index(args);
      source = names_[i];
      if (const auto* h = bench_->run(i).handle())
        for (const auto* ch : h->config().outputs_of_kind(loader::OutputKind::PointCloud))
          if (const auto* v = std::get_if<std::vector<float>>(&ch->value)) {
            pts = *v;
            break;
          }
    }
    const std::size_t budget = args.value("budget", point_budget_);
    const std::size_t total = pts.size() / 3;
    std::vector<std::size_t> keep(total);
    for (std::size_t k = 0; k < total; ++k) keep[k] = k;
    if (total > budget) {
      std::vector<std::size_t> chosen;
      std::mt19937_64 rng(bench_->spec().seed);
      std::sample(keep.begin(), keep.end(), std::back_inserter(chosen), budget, rng);
      keep = std::move(chosen);
    }
    json points = json::array();
    for (std::size_t k : keep) points.push_back({pts[3 * k], pts[3 * k + 1], pts[3 * k + 2]});
    return {{"source", source}, {"total", total}, {"budget", budget}, {"seed", bench_->spec().seed},
            {"points", std::move(points)}};
  }

  json state_reply() const {
    std::lock_guard lock(state_mu_);
    return {{"mode", mode_name(mode_)}, {"frame", frame_}};
  }

  void loop() {
    while (true) {
      std::optional<Command> cmd;
      {
        std::unique_lock lock(queue_mu_);
        queue_cv_.wait(lock, [&] { return !queue_.empty() || mode() == Mode::Running; });
        if (!queue_.empty()) {
          cmd.emplace(std::move(queue_.front()));
          queue_.pop_front();
        }
      }
      if (!cmd) {
        if (!advance()) continue;
        continue;
      }
      try {
        switch (cmd->kind) {
          case Command::Stop: {
            {
              std::lock_guard lock(state_mu_);
              stopping_ = true;
              state_cv_.notify_all();
            }
            cmd->reply.set_value(json::object());
            return;
          }
          case Command::Step: {
            const auto n = cmd->args.value("n", std::uint64_t{1});
            const Mode m = mode();
            if (m == Mode::Done || m == Mode::Failed) {
              cmd->reply.set_value(state_reply());
              break;
            }
            set_mode(Mode::Stepping);
            bool more = true;
            for (std::uint64_t k = 0; k < n && more; ++k) more = advance();
            if (more) set_mode(Mode::Paused);
            cmd->reply.set_value(state_reply());
            break;
          }
          case Command::Play:
            if (const Mode m = mode(); m != Mode::Done && m != Mode::Failed) set_mode(Mode::Running);
            cmd->reply.set_value(state_reply());
            break;
          case Command::Pause:
            if (mode() == Mode::Running) set_mode(Mode::Paused);
            cmd->reply.set_value(state_reply());
            break;
          case Command::SetParam:
            cmd->reply.set_value(set_param(cmd->args));
            break;
          case Command::Cloud:
            cmd->reply.set_value(cloud(cmd->args));
            break;
        }
      } catch (...) {
        cmd->reply.set_exception(std::current_exception());
      }
    }
  }

  std::string id_;
  std::unique_ptr<Benchmark> bench_;
  std::size_t point_budget_;
  std::vector<std::string> names_;
  std::thread worker_;

  std::mutex queue_mu_;
  std::condition_variable queue_cv_;
  std::deque<Command> queue_;

  mutable std::mutex state_mu_;
  mutable std::condition_variable state_cv_;
  Mode mode_ = Mode::Paused;
  bool stopping_ = false;
  std::uint64_t frame_ = 0;
  std::string failure_;
  json gt_ = json::array();
  json est_ = json::object();
  json rows_ = json::object();
  json params_ = json::object();
  json audit_ = json::array();
  json failures_ = json::object();
  json reports_;
  std::vector<std::string> messages_;
};

}  // namespace

struct Service::Impl {
  ServiceConfig config;
  httplib::Server server;
  std::mutex sessions_mu;
  std::map<std::string, std::shared_ptr<Session>> sessions;
  std::uint64_t next_id = 1;
  std::atomic<bool> stopping{false};

  std::shared_ptr<Session> find(const std::string& id) {
    std::lock_guard lock(sessions_mu);
    const auto it = sessions.find(id);
    if (it == sessions.end()) throw Error(Errc::SessionNotFound, "no session '" + id + "'");
    return it->second;
  }

  static json parse_body(const httplib::Request& req) {
    if (req.body.empty()) return json::object();
    try {
      json body = json::parse(req.body);
      return body.is_null() ? json::object() : body;
    } catch (const json::exception& e) {
      throw Error(Errc::InvalidArgument, std::string("request body is not JSON: ") + e.what());
    }
  }

  template <typename F>
  httplib::Server::Handler guarded(F&& f) {
    return [f = std::forward<F>(f)](const httplib::Request& req, httplib::Response& res) {
      try {
        res.set_content(f(req, res).dump(), "application/json");
      } catch (const Error& e) {
        res.status = http_status(e.code());
        res.set_content(json{{"error", errc_name(e.code())}, {"message", e.what()}}.dump(), "application/json");
      } catch (const std::exception& e) {
        res.status = 400;
        res.set_content(json{{"error", "InvalidArgument"}, {"message", e.what()}}.dump(), "application/json");
      }
    };
  }

  json command(const httplib::Request& req, Command::Kind kind, json args) {
    auto session = find(req.path_params.at("id"));
    return session->post(kind, std::move(args)).get();
  }

  void routes() {
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                {"Access-Control-Allow-Headers", "Content-Type"},
                                {"Access-Control-Allow-Methods", "GET, POST, PUT, OPTIONS"}});
    server.Options(".*", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    server.Post("/sessions", guarded([this](const httplib::Request& req, httplib::Response&) {
                  auto spec = runspec_from_json(parse_body(req), config);
                  auto bench = std::make_unique<Benchmark>(std::move(spec));
                  std::lock_guard lock(sessions_mu);
                  const std::string id = "s" + std::to_string(next_id++);
                  sessions[id] = std::make_shared<Session>(id, std::move(bench), config.point_budget);
                  return json{{"id", id}};
                }));
    server.Post("/sessions/:id/step", guarded([this](const httplib::Request& req, httplib::Response&) {
                  return command(req, Command::Step, parse_body(req));
                }));
    server.Post("/sessions/:id/play", guarded([this](const httplib::Request& req, httplib::Response&) {
                  return command(req, Command::Play, json::object());
                }));
    server.Post("/sessions/:id/pause", guarded([this](const httplib::Request& req, httplib::Response&) {
                  return command(req, Command::Pause, json::object());
                }));
    server.Put("/sessions/:id/params", guarded([this](const httplib::Request& req, httplib::Response&) {
                 return command(req, Command::SetParam, parse_body(req));
               }));
    server.Get("/sessions/:id/snapshot", guarded([this](const httplib::Request& req, httplib::Response&) {
                 return find(req.path_params.at("id"))->snapshot();
               }));
    server.Get("/sessions/:id/cloud", guarded([this](const httplib::Request& req, httplib::Response&) {
                 json args = json::object();
                 if (req.has_param("algorithm")) args["algorithm"] = req.get_param_value("algorithm");
                 if (req.has_param("budget")) args["budget"] = std::stoull(req.get_param_value("budget"));
                 if (req.has_param("gt")) args["ground_truth"] = true;
                 return command(req, Command::Cloud, std::move(args));
               }));
    server.Get("/sessions", guarded([this](const httplib::Request&, httplib::Response&) {
                 json ids = json::array();
                 std::lock_guard lock(sessions_mu);
                 for (const auto& [id, _] : sessions) ids.push_back(id);
                 return json{{"sessions", ids}};
               }));
    server.Get("/sessions/:id/stream", [this](const httplib::Request& req, httplib::Response& res) {
      std::shared_ptr<Session> session;
      try {
        session = find(req.path_params.at("id"));
      } catch (const Error& e) {
        res.status = 404;
        res.set_content(json{{"error", errc_name(e.code())}, {"message", e.what()}}.dump(), "application/json");
        return;
      }
      auto cursor = std::make_shared<std::size_t>(req.has_param("from") ? std::stoull(req.get_param_value("from")) : 0);
      res.set_chunked_content_provider("application/x-ndjson", [this, session, cursor](std::size_t, httplib::DataSink& sink) {
        bool terminal = false;
        const auto batch = session->messages(*cursor, std::chrono::milliseconds(200), terminal);
        for (const auto& m : batch) {
          const std::string line = m + "\n";
          if (!sink.write(line.data(), line.size())) return false;
          ++*cursor;
        }
        if (terminal || stopping) {
          sink.done();
          return true;
        }
        return sink.is_writable();
      });
    });
    server.Get("/algorithms", guarded([this](const httplib::Request&, httplib::Response&) {
                 json out = json::array();
                 for (const auto& lib : config.libraries) {
                   json entry = {{"name", loader::algorithm_name_from_path(lib)}, {"library", lib.string()}};
                   try {
                     auto h = loader::AlgorithmHandle::load(lib);
                     h.new_configuration();
                     entry["parameters"] = describe_parameters(h);
                   } catch (const Error& e) {
                     entry["error"] = e.what();
                   }
                   out.push_back(std::move(entry));
                 }
                 return json{{"algorithms", std::move(out)}};
               }));
    server.Get("/datasets", guarded([this](const httplib::Request&, httplib::Response&) {
                 json out = json::array();
                 for (const auto& d : config.datasets) {
                   try {
                     out.push_back(to_json(io::summarize_datafile(d)));
                   } catch (const Error& e) {
                     out.push_back({{"path", d.string()}, {"error", e.what()}});
                   }
                 }
                 return json{{"datasets", std::move(out)}};
               }));
  }
};

Service::Service(ServiceConfig config) : impl_(std::make_unique<Impl>()) {
  impl_->config = std::move(config);
  impl_->routes();
}

Service::~Service() {
  stop();
  std::lock_guard lock(impl_->sessions_mu);
  impl_->sessions.clear();
}

int Service::bind(const std::string& host, int port) {
  const int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw Error(Errc::IoFailure, "cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void Service::run() { impl_->server.listen_after_bind(); }

void Service::stop() {
  impl_->stopping = true;
  impl_->server.stop();
}

}  // namespace slambench::runner
