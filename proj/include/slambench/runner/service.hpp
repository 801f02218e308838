#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "slambench/runner/benchmark.hpp"

namespace slambench::runner {

struct ServiceConfig {
  std::vector<std::filesystem::path> libraries;  // listed by GET /algorithms, resolvable by short name
  std::vector<std::filesystem::path> datasets;   // listed by GET /datasets, resolvable by file name
  std::size_t point_budget = 20000;              // default cap for point-cloud snapshots
};

// Builds a RunSpec from a session request body. Library entries may be paths or short names of
// configured libraries; `dataset` may name a configured datafile instead of giving `datafile`.
RunSpec runspec_from_json(const nlohmann::json& body, const ServiceConfig& config);

nlohmann::json to_json(const io::DatafileSummary& summary);
nlohmann::json describe_parameters(const loader::AlgorithmHandle& handle);

// HTTP front-end. Each session runs on its own worker thread that owns the session's algorithm
// handles; requests reach it through a command queue and read immutable snapshots.
//
//   POST /sessions                 {runspec}       -> {id}
//   POST /sessions/{id}/step       {n}             -> {mode, frame}
//   POST /sessions/{id}/play | /pause
//   PUT  /sessions/{id}/params     {algorithm?, name, value}
//   GET  /sessions/{id}/snapshot
//   GET  /sessions/{id}/cloud?algorithm=&budget=
//   GET  /sessions/{id}/stream?from=k   newline-delimited JSON messages
//   GET  /algorithms, GET /datasets
class Service {
 public:
  explicit Service(ServiceConfig config);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Binds without serving; port 0 picks a free port. Returns the bound port or throws IoFailure.
  int bind(const std::string& host, int port);
  // Serves until stop() is called.
  void run();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace slambench::runner
