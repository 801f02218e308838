#include "slambench/runner/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "slambench/error.hpp"

namespace slambench::runner {

std::vector<std::size_t> compute_pareto(std::span<const std::pair<double, double>> points) {
  if (points.empty()) throw Error(Errc::NoValidSamples, "no sample has both objectives");
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (points[a].first != points[b].first) return points[a].first < points[b].first;
    return points[a].second < points[b].second;
  });
  // Sweep by increasing first objective; a point survives when no earlier point (smaller or equal
  // first objective) has a second objective that dominates it.
  std::vector<std::size_t> front;
  double best_second = std::numeric_limits<double>::infinity();
  std::size_t i = 0;
  while (i < order.size()) {
    // Group equal first objectives: within a group only the minimal second objective survives.
    std::size_t j = i;
    while (j < order.size() && points[order[j]].first == points[order[i]].first) ++j;
    const double group_min = points[order[i]].second;
    if (group_min < best_second) {
      for (std::size_t k = i; k < j && points[order[k]].second == group_min; ++k) front.push_back(order[k]);
      best_second = group_min;
    }
    i = j;
  }
  std::stable_sort(front.begin(), front.end(), [&](std::size_t a, std::size_t b) {
    if (points[a].first != points[b].first) return points[a].first < points[b].first;
    return a < b;
  });
  return front;
}

std::vector<std::size_t> compute_pareto(const std::vector<SweepSample>& samples) {
  std::vector<std::pair<double, double>> pts;
  std::vector<std::size_t> map;
  for (std::size_t i = 0; i < samples.size(); ++i)
    if (samples[i].ok && samples[i].mean_duration && samples[i].ate_rmse) {
      pts.emplace_back(*samples[i].mean_duration, *samples[i].ate_rmse);
      map.push_back(i);
    }
  auto front = compute_pareto(pts);
  for (auto& f : front) f = map[f];
  return front;
}

namespace {

std::string format_number(double v, api::ValueType type) {
  if (type == api::ValueType::Int) return std::to_string(static_cast<long long>(std::llround(v)));
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

std::vector<std::string> grid_values(const ParamDomain& d, const api::ParameterSpec& p) {
  if (!d.values.empty()) return d.values;
  if (!d.min || !d.max || !d.step || !(*d.step > 0.0) || *d.max < *d.min)
    throw Error(Errc::InvalidConfig, "grid domain for '" + d.name + "' needs a list or min <= max with step > 0");
  std::vector<std::string> out;
  for (std::size_t k = 0;; ++k) {
    const double v = *d.min + static_cast<double>(k) * *d.step;
    if (v > *d.max + 1e-9 * *d.step) break;
    out.push_back(format_number(v, p.type));
  }
  return out;
}

}  // namespace

std::vector<std::map<std::string, std::string>> expand_configurations(const SweepSpec& spec) {
  if (spec.base.algorithms.size() != 1) throw Error(Errc::InvalidConfig, "a sweep explores exactly one algorithm");
  if (spec.domains.empty()) throw Error(Errc::InvalidConfig, "a sweep needs at least one parameter domain");

  // A scratch instance validates names, types and bounds of every candidate value.
  auto probe = loader::AlgorithmHandle::load(spec.base.algorithms[0].library);
  probe.new_configuration();
  std::vector<const api::ParameterSpec*> specs;
  for (const auto& d : spec.domains) {
    const auto* p = probe.config().find_parameter(d.name);
    if (!p) throw Error(Errc::UnknownParameter, probe.name() + " has no parameter '" + d.name + "'");
    specs.push_back(p);
  }
  const auto check = [&](const api::ParameterSpec& p, const std::string& v) { probe.set_parameter_from_string(p.long_name, v); };

  std::vector<std::map<std::string, std::string>> configs;
  if (spec.strategy == SweepStrategy::Grid) {
    std::vector<std::vector<std::string>> axes;
    for (std::size_t i = 0; i < spec.domains.size(); ++i) {
      axes.push_back(grid_values(spec.domains[i], *specs[i]));
      for (const auto& v : axes.back()) check(*specs[i], v);
    }
    std::vector<std::size_t> idx(axes.size(), 0);
    while (true) {
      std::map<std::string, std::string> c;
      for (std::size_t i = 0; i < axes.size(); ++i) c[specs[i]->long_name] = axes[i][idx[i]];
      configs.push_back(std::move(c));
      std::size_t k = axes.size();
      while (k-- > 0) {
        if (++idx[k] < axes[k].size()) break;
        idx[k] = 0;
      }
      if (k == static_cast<std::size_t>(-1)) break;
    }
  } else {
    if (spec.samples == 0) throw Error(Errc::InvalidConfig, "random sweep needs at least one sample");
    std::mt19937_64 rng(spec.seed);
    for (std::size_t n = 0; n < spec.samples; ++n) {
      std::map<std::string, std::string> c;
      for (std::size_t i = 0; i < spec.domains.size(); ++i) {
        const auto& d = spec.domains[i];
        const auto& p = *specs[i];
        std::string v;
        if (!d.values.empty()) {
          v = d.values[std::uniform_int_distribution<std::size_t>(0, d.values.size() - 1)(rng)];
        } else if (p.type == api::ValueType::Bool) {
          v = std::uniform_int_distribution<int>(0, 1)(rng) ? "true" : "false";
        } else if (d.min && d.max && *d.min <= *d.max) {
          if (p.type == api::ValueType::Int)
            v = std::to_string(std::uniform_int_distribution<long long>(std::llround(std::ceil(*d.min)),
                                                                        std::llround(std::floor(*d.max)))(rng));
          else
            v = format_number(std::uniform_real_distribution<double>(*d.min, *d.max)(rng), p.type);
        } else {
          throw Error(Errc::InvalidConfig, "random domain for '" + d.name + "' needs a list or min <= max");
        }
        check(p, v);
        c[p.long_name] = v;
      }
      configs.push_back(std::move(c));
    }
  }
  return configs;
}

SweepResult run_sweep(const SweepSpec& spec) {
  SweepResult result;
  for (auto& config : expand_configurations(spec)) {
    RunSpec run = spec.base;
    for (const auto& [name, value] : config) run.algorithms[0].parameters.emplace_back(name, value);
    SweepSample sample;
    sample.parameters = std::move(config);
    try {
      const auto reports = run_benchmark(run);
      const auto& rep = reports.at(0);
      if (!rep.ok) {
        sample.failure = rep.failure;
      } else if (rep.summary.frames == 0) {
        sample.failure = "no frame was processed";
      } else if (!rep.summary.ate_rmse) {
        sample.failure = "no estimate could be associated with ground truth";
      } else {
        sample.ok = true;
        sample.mean_duration = rep.summary.total_duration / static_cast<double>(rep.summary.frames);
        sample.ate_rmse = rep.summary.ate_rmse;
      }
    } catch (const Error& e) {
      sample.failure = e.what();
    }
    result.samples.push_back(std::move(sample));
  }
  try {
    result.front = compute_pareto(result.samples);
  } catch (const Error&) {
    result.front.clear();
  }
  return result;
}

nlohmann::json to_json(const SweepResult& r) {
  nlohmann::json samples = nlohmann::json::array();
  for (const auto& s : r.samples)
    samples.push_back({{"parameters", s.parameters},
                       {"ok", s.ok},
                       {"failure", s.failure},
                       {"mean_duration", s.mean_duration ? nlohmann::json(*s.mean_duration) : nlohmann::json(nullptr)},
                       {"ate_rmse", s.ate_rmse ? nlohmann::json(*s.ate_rmse) : nlohmann::json(nullptr)}});
  return {{"samples", std::move(samples)}, {"front", r.front}};
}

}  // namespace slambench::runner
