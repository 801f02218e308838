// sb_sweep -i <file.slam> -load <library> --values stride=2,4,8 [--range name=min:max:step]

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

#include "slambench/error.hpp"
#include "slambench/runner/sweep.hpp"

namespace sb = slambench;

namespace {

std::pair<std::string, std::string> split_assignment(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) throw sb::Error(sb::Errc::InvalidArgument, "expected name=..., got '" + text + "'");
  return {text.substr(0, eq), text.substr(eq + 1)};
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    out.push_back(text.substr(start, pos - start));
    if (pos == std::string::npos) return out;
    start = pos + 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  for (auto& a : args)
    if (a == "-load") a = "--load";

  CLI::App app{"Sweeps one algorithm's parameters and reports the duration/ATE Pareto front."};
  std::string input, library, output, strategy = "grid";
  std::vector<std::string> values, ranges, fixed;
  std::size_t samples = 10;
  std::uint64_t seed = 0, frame_limit = 0;
  app.add_option("-i,--input", input, "Input datafile")->required();
  app.add_option("--load", library, "Algorithm library")->required();
  app.add_option("--values", values, "name=v1,v2,... explicit values");
  app.add_option("--range", ranges, "name=min:max[:step] numeric range (step required for grid)");
  app.add_option("--set", fixed, "name=value held fixed for every configuration");
  app.add_option("--strategy", strategy, "grid or random")->check(CLI::IsMember({"grid", "random"}))->capture_default_str();
  app.add_option("--samples", samples, "Configurations drawn by the random strategy")->capture_default_str();
  app.add_option("--seed", seed, "Random strategy seed");
  app.add_option("--frame-limit", frame_limit, "Stop each run after N input frames");
  app.add_option("-o,--output", output, "Write samples and front as JSON");
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    sb::runner::SweepSpec spec;
    spec.base.datafile = input;
    sb::runner::AlgorithmSpec alg{library, {}, {}};
    for (const auto& f : fixed) alg.parameters.push_back(split_assignment(f));
    spec.base.algorithms.push_back(alg);
    spec.base.compute_rer = false;
    if (frame_limit > 0) spec.base.frame_limit = frame_limit;
    for (const auto& v : values) {
      auto [name, list] = split_assignment(v);
      spec.domains.push_back({name, split(list, ','), {}, {}, {}});
    }
    for (const auto& r : ranges) {
      auto [name, text] = split_assignment(r);
      const auto parts = split(text, ':');
      if (parts.size() < 2 || parts.size() > 3) throw sb::Error(sb::Errc::InvalidArgument, "bad range '" + r + "'");
      sb::runner::ParamDomain d{name, {}, std::stod(parts[0]), std::stod(parts[1]), {}};
      if (parts.size() == 3) d.step = std::stod(parts[2]);
      spec.domains.push_back(d);
    }
    spec.strategy = strategy == "grid" ? sb::runner::SweepStrategy::Grid : sb::runner::SweepStrategy::Random;
    spec.samples = samples;
    spec.seed = seed;

    const auto result = sb::runner::run_sweep(spec);
    std::vector<bool> on_front(result.samples.size());
    for (auto i : result.front) on_front[i] = true;
    for (std::size_t i = 0; i < result.samples.size(); ++i) {
      const auto& s = result.samples[i];
      std::cout << (on_front[i] ? "* " : "  ");
      for (const auto& [k, v] : s.parameters) std::cout << k << '=' << v << ' ';
      if (s.ok && s.mean_duration && s.ate_rmse) {
        std::printf("duration %.9f ATE %.10f\n", *s.mean_duration, *s.ate_rmse);
        std::fflush(stdout);
      } else {
        std::cout << "failed: " << (s.ok ? "no objectives" : s.failure) << '\n';
      }
    }
    if (!output.empty()) {
      std::ofstream out(output);
      out << sb::runner::to_json(result).dump(1) << '\n';
      if (!out) throw sb::Error(sb::Errc::IoFailure, "cannot write " + output);
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
