// sb_loader -i <file.slam> -load <library> [-load <library>]... [--<algo>-<param> <value>]...
//
// Libraries are opened once before the real parse so that their declared parameters show up as
// options (and in --help).

#include <CLI11.hpp>

#include <csignal>
#include <cstdio>
#include <iostream>
#include <map>
#include <pthread.h>
#include <set>
#include <thread>

#include "slambench/error.hpp"
#include "slambench/loader/algorithm.hpp"
#include "slambench/runner/benchmark.hpp"
#include "slambench/runner/service.hpp"

namespace sb = slambench;

namespace {

std::vector<std::string> library_arguments(const std::vector<std::string>& args) {
  std::vector<std::string> libs;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--load" && i + 1 < args.size()) libs.push_back(args[i + 1]);
    else if (args[i].rfind("--load=", 0) == 0) libs.push_back(args[i].substr(7));
  }
  return libs;
}

std::string compact(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::pair<std::string, int> split_address(const std::string& addr) {
  const auto colon = addr.rfind(':');
  if (colon == std::string::npos) return {"127.0.0.1", std::stoi(addr)};
  return {colon == 0 ? "127.0.0.1" : addr.substr(0, colon), std::stoi(addr.substr(colon + 1))};
}

int serve(const std::string& addr, const sb::runner::ServiceConfig& config) {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);

  sb::runner::Service service(config);
  const auto [host, port] = split_address(addr);
  const int bound = service.bind(host, port);
  std::cerr << "serving on " << host << ':' << bound << std::endl;
  std::thread server([&] { service.run(); });
  int sig = 0;
  sigwait(&set, &sig);
  service.stop();
  server.join();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  for (auto& a : args)
    if (a == "-load") a = "--load";

  CLI::App app{"Runs SLAM algorithm libraries over a datafile and prints per-frame metrics."};
  app.get_formatter()->column_width(44);

  std::string input;
  std::vector<std::string> libraries;
  std::uint64_t frame_limit = 0;
  double max_dt = sb::metrics::kDefaultMaxDt;
  std::string memory_probe = "alloc";
  std::string power_trace;
  std::string output;
  std::string format = "json";
  std::string serve_addr;
  bool forward_gt = false;
  bool no_rer = false;
  std::uint64_t seed = 0;

  app.add_option("-i,--input", input, "Input datafile (.slam)");
  app.add_option("--load", libraries, "Algorithm library; repeat to compare several")->take_all();
  app.add_option("--frame-limit", frame_limit, "Stop after N input frames");
  app.add_option("--max-dt", max_dt, "Association gate in seconds")->capture_default_str();
  app.add_option("--memory-probe", memory_probe, "Memory probe")->check(CLI::IsMember({"alloc", "rss"}))->capture_default_str();
  app.add_option("--power-trace", power_trace, "Replay a '<seconds> <watts>' trace as the power probe");
  app.add_option("-o,--output", output, "Write reports to this file");
  app.add_option("--format", format, "Report format")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
  app.add_option("--serve", serve_addr, "Serve the session API on [host:]port instead of running");
  app.add_flag("--forward-gt", forward_gt, "Deliver ground-truth frames to the algorithms (test mode)");
  app.add_flag("--no-rer", no_rer, "Skip the reconstruction error");
  app.add_option("--seed", seed, "Seed recorded in reports and used for decimation");

  // Discovery pass: every loadable library contributes --<algo>-<long> and --<algo>-<short>.
  std::map<std::string, std::string> option_values;
  std::set<std::string> names;
  std::vector<std::pair<CLI::Option*, std::pair<std::string, std::string>>> param_options;
  for (const auto& lib : library_arguments(args)) {
    const auto name = sb::loader::algorithm_name_from_path(lib);
    if (!names.insert(name).second) {
      std::cerr << "error: algorithm name '" << name << "' is used by more than one library\n";
      return 2;
    }
    try {
      auto h = sb::loader::AlgorithmHandle::load(lib);
      h.new_configuration();
      const auto group = name + " parameters";
      for (const auto& p : h.parameters()) {
        std::string desc = p.description + " [" + std::string(sb::loader::value_type_name(p.type)) +
                           ", default " + sb::loader::to_string(p.default_value);
        if (p.bounds) desc += ", " + compact(p.bounds->first) + ".." + compact(p.bounds->second);
        if (p.live) desc += ", live";
        desc += "]";
        std::string flags = "--" + name + "-" + p.long_name;
        if (!p.short_name.empty() && p.short_name != p.long_name) flags += ",--" + name + "-" + p.short_name;
        auto& slot = option_values[name + "\x1f" + p.long_name];
        auto* opt = app.add_option(flags, slot, desc)->group(group);
        param_options.push_back({opt, {name, p.long_name}});
      }
    } catch (const sb::Error& e) {
      std::cerr << "warning: " << lib << ": " << e.what() << '\n';
    }
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  if (!serve_addr.empty()) {
    sb::runner::ServiceConfig config;
    for (const auto& l : libraries) config.libraries.push_back(l);
    if (!input.empty()) config.datasets.push_back(input);
    try {
      return serve(serve_addr, config);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return 1;
    }
  }

  if (input.empty() || libraries.empty()) {
    std::cerr << "error: -i <file.slam> and at least one -load <library> are required\n" << app.help();
    return 2;
  }

  sb::runner::RunSpec spec;
  spec.datafile = input;
  for (const auto& l : libraries) spec.algorithms.push_back({l, {}, {}});
  for (const auto& [opt, key] : param_options) {
    if (opt->count() == 0) continue;
    for (auto& a : spec.algorithms)
      if (sb::loader::algorithm_name_from_path(a.library) == key.first)
        a.parameters.emplace_back(key.second, option_values[key.first + "\x1f" + key.second]);
  }
  if (frame_limit > 0) spec.frame_limit = frame_limit;
  spec.max_dt = max_dt;
  spec.forward_gt = forward_gt;
  spec.compute_rer = !no_rer;
  spec.seed = seed;
  if (!power_trace.empty()) spec.power_trace = power_trace;

  try {
    spec.memory_probe = sb::metrics::parse_memory_probe(memory_probe);
    const auto reports = sb::runner::run_benchmark(spec, &std::cout);
    int status = 0;
    for (const auto& r : reports) {
      if (!r.ok) {
        std::cerr << r.metadata.algorithm << ": " << r.failure << '\n';
        status = 1;
      }
      for (const auto& note : r.summary.notes) std::cerr << r.metadata.algorithm << ": " << note << '\n';
    }
    if (!output.empty()) sb::runner::export_reports(reports, output, sb::runner::parse_report_format(format));
    return status;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
