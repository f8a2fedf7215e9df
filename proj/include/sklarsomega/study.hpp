#pragma once

// Simulation study: repeatedly simulate fully observed inter-coder data,
// estimate omega and Krippendorff's alpha, and summarize both.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sklarsomega/data.hpp"
#include "sklarsomega/error.hpp"
#include "sklarsomega/estimation.hpp"
#include "sklarsomega/kripp_alpha.hpp"
#include "sklarsomega/parallel.hpp"
#include "sklarsomega/rng.hpp"
#include "sklarsomega/simulate.hpp"
#include "sklarsomega/stats.hpp"
#include "sklarsomega/uncertainty.hpp"

namespace sklarsomega {

struct Scenario {
  std::string name;
  SimulationMargin margin = MarginalFamily::gaussian(0.0, 1.0);
  Level level = Level::interval;
  double omega = 0.5;
  std::size_t n_units = 30;
  int n_coders = 3;
  Method method = Method::ML;
  std::optional<MarginKind> fit_margin;  // empty for SMP
  ConfintKind interval = ConfintKind::asymptotic;
  std::size_t reps = 200;
  std::uint64_t seed = 1;
  std::size_t n_boot = 1000;  // sandwich, full bootstrap and alpha bootstrap size
  Level alpha_metric = Level::interval;  // the data's level unless overridden
  double confidence = 0.95;
};

struct EstimatorSummary {
  double median = 0.0;
  double bias = 0.0;  // |mean - true| / true
  double variance = 0.0;
  double mse = 0.0;
  double coverage = 0.0;
  std::vector<double> estimates;
};

struct ScenarioResult {
  std::string name;
  double truth = 0.0;
  std::size_t reps = 0;
  std::size_t failed = 0;
  EstimatorSummary omega;
  EstimatorSummary alpha;
};

namespace detail {

inline Level default_level(const SimulationMargin& m) {
  if (m.categorical()) return Level::nominal;
  if (m.kind() == SimulationMargin::Kind::family &&
      (m.family().kind == MarginKind::beta || m.family().kind == MarginKind::gamma))
    return Level::ratio;
  return Level::interval;
}

// Fit margin and metric implied by the generating margin.
inline void complete_scenario(Scenario& s) {
  s.level = default_level(s.margin);
  s.alpha_metric = s.level;
  if (s.margin.kind() == SimulationMargin::Kind::family)
    s.fit_margin = s.margin.family().kind;
  else
    s.fit_margin.reset();
}

inline EstimatorSummary summarize(std::vector<double> est, double truth, std::size_t covered) {
  EstimatorSummary s;
  const double n = static_cast<double>(est.size());
  const double m = stats::mean(est);
  double v = 0.0;
  for (double x : est) v += (x - m) * (x - m);
  s.variance = v / n;
  s.bias = std::abs(m - truth) / truth;
  s.mse = s.variance + (m - truth) * (m - truth);
  s.coverage = static_cast<double>(covered) / n;
  s.median = stats::median(est);
  s.estimates = std::move(est);
  return s;
}

}  // namespace detail

/// The six named scenarios of the standard study: beta-1.5-2, beta-13-2,
/// laplace, mixture-smp, categorical-dt, bernoulli-cml.
inline std::vector<std::string> scenario_names() {
  return {"beta-1.5-2", "beta-13-2", "laplace", "mixture-smp", "categorical-dt", "bernoulli-cml"};
}

inline Scenario named_scenario(std::string_view name) {
  Scenario s;
  s.name = std::string(name);
  if (name == "beta-1.5-2") {
    s.margin = MarginalFamily::beta(1.5, 2.0);
    s.omega = 0.70, s.n_units = 30, s.n_coders = 3, s.method = Method::ML;
  } else if (name == "beta-13-2") {
    s.margin = MarginalFamily::beta(13.0, 2.0);
    s.omega = 0.95, s.n_units = 10, s.n_coders = 5, s.method = Method::ML;
  } else if (name == "laplace") {
    s.margin = MarginalFamily::laplace(12.0, 4.0);
    s.omega = 0.65, s.n_units = 40, s.n_coders = 2, s.method = Method::ML;
  } else if (name == "mixture-smp") {
    s.margin = GaussianMixture{{0.3, 0.7}, {0.0, 3.0}, {1.0, 0.5}};
    s.omega = 0.80, s.n_units = 100, s.n_coders = 4, s.method = Method::SMP;
    s.interval = ConfintKind::bootstrap;
  } else if (name == "categorical-dt") {
    s.margin = MarginalFamily::categorical({0.1, 0.3, 0.2, 0.05, 0.35});
    s.omega = 0.90, s.n_units = 20, s.n_coders = 10, s.method = Method::DT;
  } else if (name == "bernoulli-cml") {
    s.margin = MarginalFamily::categorical({0.3, 0.7});
    s.omega = 0.40, s.n_units = 300, s.n_coders = 6, s.method = Method::CML;
  } else {
    throw ParseError("unknown scenario '" + std::string(name) + "'");
  }
  detail::complete_scenario(s);
  return s;
}

/// Scenario from "key = value" lines ('#' starts a comment). Keys: name,
/// margin, omega, units, coders, method, interval, reps, seed, bootit,
/// level, metric, confidence. `base` names a built-in scenario to start from.
inline Scenario parse_scenario(std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto t = detail::trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos) throw ParseError("scenario line " + std::to_string(lineno) + ": expected key = value");
    kv[std::string(detail::trim(t.substr(0, eq)))] = std::string(detail::trim(t.substr(eq + 1)));
  }
  Scenario s;
  if (auto it = kv.find("base"); it != kv.end()) s = named_scenario(it->second);
  auto number = [&](const std::string& key, double& out) {
    auto it = kv.find(key);
    if (it == kv.end()) return;
    try {
      std::size_t used = 0;
      out = std::stod(it->second, &used);
      if (used != it->second.size()) throw std::invalid_argument(key);
    } catch (const std::exception&) {
      throw ParseError("scenario: bad value for " + key);
    }
  };
  auto count = [&](const std::string& key, auto& out) {
    double v = static_cast<double>(out);
    number(key, v);
    if (v < 1 || v != std::floor(v)) throw ParseError("scenario: " + key + " must be a positive integer");
    out = static_cast<std::remove_reference_t<decltype(out)>>(v);
  };
  if (auto it = kv.find("margin"); it != kv.end()) {
    s.margin = parse_simulation_margin(it->second);
    detail::complete_scenario(s);
    if (s.margin.kind() == SimulationMargin::Kind::mixture) s.method = Method::SMP;
  }
  if (auto it = kv.find("name"); it != kv.end()) s.name = it->second;
  if (s.name.empty()) s.name = "custom";
  number("omega", s.omega);
  count("units", s.n_units);
  count("coders", s.n_coders);
  count("reps", s.reps);
  count("seed", s.seed);
  count("bootit", s.n_boot);
  number("confidence", s.confidence);
  if (auto it = kv.find("method"); it != kv.end()) s.method = parse_method(it->second);
  if (auto it = kv.find("interval"); it != kv.end()) s.interval = parse_confint(it->second);
  if (auto it = kv.find("level"); it != kv.end()) s.level = parse_level(it->second);
  if (auto it = kv.find("metric"); it != kv.end()) s.alpha_metric = parse_level(it->second);
  if (s.interval == ConfintKind::none) throw ParseError("scenario: an interval kind is required");
  if (s.method == Method::SMP) s.fit_margin.reset();
  if (!(s.omega >= 0.0 && s.omega < 1.0)) throw ParseError("scenario: omega must lie in [0,1)");
  if (s.n_coders < 2) throw ParseError("scenario: at least two coders are needed");
  return s;
}

/// Run the replicate loop. Replicate r uses stream r of the seed; its
/// interval and alpha bootstrap use further streams derived from it.
inline ScenarioResult run_scenario(const Scenario& s, std::size_t workers = 1) {
  struct Rep {
    bool ok = false;
    double omega = 0.0, alpha = 0.0;
    bool omega_covered = false, alpha_covered = false;
  };
  std::vector<Rep> reps(s.reps);
  parallel_for(s.reps, workers, [&](std::size_t r) {
    Rng rng(s.seed, r);
    try {
      const AgreementData data = simulate_inter(s.omega, s.margin, s.n_units, s.n_coders, s.level, rng);
      FitOptions o;
      o.model.method = s.method;
      o.model.margin = s.fit_margin;
      const Fit f = fit(data, o);
      if (!f.converged) return;
      ConfintOptions c;
      c.kind = s.interval;
      c.n_boot = s.n_boot;
      c.seed = stream_seed(s.seed, r);
      c.level = s.confidence;
      const auto iv = confidence_intervals(f, c).intervals.front();
      const auto a = alpha_bootstrap(data, s.alpha_metric, s.n_boot, stream_seed(s.seed + 1, r), s.confidence);
      Rep out;
      out.ok = true;
      out.omega = f.omega().front();
      out.alpha = a.estimate;
      out.omega_covered = iv.lower <= s.omega && s.omega <= iv.upper;
      out.alpha_covered = a.lower <= s.omega && s.omega <= a.upper;
      reps[r] = out;
    } catch (const Error&) {
    }
  });

  ScenarioResult res;
  res.name = s.name;
  res.truth = s.omega;
  res.reps = s.reps;
  std::vector<double> w, a;
  std::size_t cw = 0, ca = 0;
  for (const auto& r : reps) {
    if (!r.ok) {
      ++res.failed;
      continue;
    }
    w.push_back(r.omega);
    a.push_back(r.alpha);
    cw += r.omega_covered;
    ca += r.alpha_covered;
  }
  if (static_cast<double>(res.failed) > 0.05 * static_cast<double>(s.reps) || w.empty())
    throw FitError("study: " + std::to_string(res.failed) + " of " + std::to_string(s.reps) +
                   " replicates failed");
  res.omega = detail::summarize(std::move(w), s.omega, cw);
  res.alpha = detail::summarize(std::move(a), s.omega, ca);
  return res;
}

inline std::string study_csv_header() {
  return "scenario,truth,estimator,median,bias,variance,mse,coverage,reps,failed\n";
}

inline std::string study_csv_rows(const ScenarioResult& r) {
  std::ostringstream out;
  auto row = [&](const char* which, const EstimatorSummary& e) {
    out << r.name << ',' << detail::format_double(r.truth) << ',' << which << ',' << detail::format_double(e.median)
        << ',' << detail::format_double(e.bias) << ',' << detail::format_double(e.variance) << ','
        << detail::format_double(e.mse) << ',' << detail::format_double(e.coverage) << ',' << r.reps << ','
        << r.failed << '\n';
  };
  row("omega", r.omega);
  row("alpha", r.alpha);
  return out.str();
}

}  // namespace sklarsomega
