#pragma once

// Command-line front end: fit, alpha, influence, simulate, study, export-plot.
// Needs CLI11.hpp and json.hpp on the include path.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sklarsomega/sklarsomega.hpp"

namespace sklarsomega::cli {

enum ExitCode : int { ok = 0, usage = 1, parse_failure = 2, fit_failure = 3, degenerate = 4 };

namespace detail {

using nlohmann::json;

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline void write_text(const std::string& path, const std::string& text, std::ostream& fallback) {
  if (path.empty() || path == "-") {
    fallback << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write '" + path + "'");
  out << text;
}

inline AgreementData load(const std::string& path, Level level, std::optional<int> categories = {}) {
  return parse_csv(std::string_view(read_file(path)), level, categories);
}

// Numeric matrix from a headerless CSV (one row per coder).
inline Eigen::MatrixXd load_design(const std::string& path) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(read_file(path));
  std::string line;
  while (std::getline(in, line)) {
    if (sklarsomega::detail::trim(line).empty()) continue;
    std::vector<double> r;
    for (auto tok : sklarsomega::detail::split(line, ',')) {
      const std::string t(sklarsomega::detail::trim(tok));
      try {
        std::size_t used = 0;
        r.push_back(std::stod(t, &used));
        if (used != t.size()) throw std::invalid_argument(t);
      } catch (const std::exception&) {
        throw ParseError("design: '" + t + "' is not a number");
      }
    }
    if (!rows.empty() && r.size() != rows.front().size()) throw ParseError("design: ragged rows");
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw ParseError("design: empty file");
  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return x;
}

inline std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

inline std::string pad(std::string s, std::size_t width, bool right = false) {
  if (s.size() >= width) return s;
  return right ? std::string(width - s.size(), ' ') + s : s + std::string(width - s.size(), ' ');
}

// Rows of cells printed with every column padded to its widest cell.
inline std::string table(const std::vector<std::vector<std::string>>& rows, bool first_left = true) {
  std::vector<std::size_t> w;
  for (const auto& r : rows) {
    if (w.size() < r.size()) w.resize(r.size(), 0);
    for (std::size_t j = 0; j < r.size(); ++j) w[j] = std::max(w[j], r[j].size());
  }
  std::string out;
  for (const auto& r : rows) {
    std::string line;
    for (std::size_t j = 0; j < r.size(); ++j) {
      if (j) line += ' ';
      line += pad(r[j], w[j], !(first_left && j == 0));
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + '\n';
  }
  return out;
}

inline std::vector<std::size_t> parse_units(const std::string& s) {
  std::vector<std::size_t> out;
  for (auto tok : sklarsomega::detail::split(s, ',')) {
    auto v = sklarsomega::detail::parse_positive(sklarsomega::detail::trim(tok));
    if (!v) throw DomainError("'" + std::string(tok) + "' is not a positive integer");
    out.push_back(static_cast<std::size_t>(*v));
  }
  return out;
}

inline std::string call_line(int argc, const char* const* argv) {
  std::string out;
  for (int i = 0; i < argc; ++i) {
    if (i) out += ' ';
    std::string a = argv[i];
    if (i == 0) a = "sklarsomega";
    out += a.find(' ') == std::string::npos ? a : "'" + a + "'";
  }
  return out;
}

inline json interval_json(const ParameterInterval& iv) {
  json j{{"name", iv.name}, {"estimate", iv.estimate}, {"lower", iv.lower}, {"upper", iv.upper}};
  j["se"] = std::isfinite(iv.se) ? json(iv.se) : json(nullptr);
  j["mcse_lower"] = iv.mcse_lower;
  j["mcse_upper"] = iv.mcse_upper;
  return j;
}

// Options shared by fit and influence.
struct ModelFlags {
  std::string input;
  std::string level = "interval";
  std::string method;
  std::string structure = "inter";
  std::string dist;
  std::string design;
  std::string link = "probit";
  std::string ecdf = "winsorized";
  std::optional<int> categories;
  std::string confint = "none";
  std::size_t bootit = 1000;
  bool parallel = false;
  std::size_t nodes = 0;
  std::uint64_t seed = 1;
  std::string json_path;
  bool truncate = false;
  bool keep_singletons = false;

  void add(CLI::App& app, bool with_confint) {
    app.add_option("input", input, "CSV file of scores")->required();
    app.add_option("--level", level, "nominal, ordinal, interval or ratio")->capture_default_str();
    app.add_option("--method", method, "ML, DT, CML or SMP (default from the level)");
    app.add_option("--structure", structure, "inter, gold, gold-regression, intra-inter, multi-method")
        ->capture_default_str();
    app.add_option("--dist", dist, "marginal family: gaussian, laplace, t, gamma, beta, categorical");
    app.add_option("--design", design, "covariate CSV for gold-regression (one row per coder, no header)");
    app.add_option("--link", link, "probit or logit")->capture_default_str();
    app.add_option("--ecdf", ecdf, "SMP first stage: standard, winsorized, smoothed")->capture_default_str();
    app.add_option("--categories", categories, "number of categories K (categorical data)");
    app.add_option("--seed", seed, "random seed")->capture_default_str();
    app.add_option("--json", json_path, "write a JSON result document");
    app.add_flag("--keep-singletons", keep_singletons, "keep units with a single score");
    if (with_confint) {
      app.add_option("--confint", confint, "none, asymptotic or bootstrap")->capture_default_str();
      app.add_option("--bootit", bootit, "bootstrap size")->capture_default_str();
      app.add_flag("--parallel", parallel, "use several worker threads");
      app.add_option("--nodes", nodes, "worker threads (0 = all cores)")->capture_default_str();
      app.add_flag("--truncate", truncate, "clip agreement intervals to [0,1]");
    }
  }

  std::size_t workers() const { return parallel ? worker_count(nodes) : 1; }

  FitOptions fit_options(const AgreementData& data) const {
    FitOptions o;
    o.model.structure = parse_structure(structure);
    if (!method.empty()) o.model.method = parse_method(method);
    if (!dist.empty()) o.model.margin = parse_margin_kind(dist);
    if (!design.empty()) o.model.design = load_design(design);
    o.model.link = parse_link(link);
    o.model.ecdf = parse_ecdf_variant(ecdf);
    o.drop_singleton_units = !keep_singletons;
    const Method m = o.model.method.value_or(default_method(data.level(), data.categories()));
    const MarginKind k = o.model.margin.value_or(default_margin(data));
    try {
      check_compatible(m, k, data.level());
    } catch (const FitError& e) {
      throw DomainError(e.what());
    }
    return o;
  }
};

inline std::string margin_label(const Fit& f) {
  if (f.method == Method::SMP) return "empirical (" + to_string(f.options.model.ecdf) + ")";
  return to_string(f.margin_kind);
}

inline std::string fit_summary(const Fit& f, const std::string& call, const ModelFlags& flags,
                               const std::optional<UncertaintySummary>& u) {
  std::ostringstream out;
  out << "Call:\n\n" << call << "\n\nConvergence:\n\n";
  if (f.converged)
    out << "Optimization converged at " << fixed(f.loglik, 2) << " after " << f.iterations << " iterations.\n";
  else
    out << "Optimization failed to converge (" << f.message << ") at " << fixed(f.loglik, 2) << " after "
        << f.iterations << " iterations.\n";
  out << "\nControl parameters:\n\n";
  std::vector<std::vector<std::string>> control{
      {"method", to_string(f.method)},
      {"structure", to_string(f.structure.kind())},
      {"dist", margin_label(f)},
      {"confint", flags.confint},
  };
  if (u) {
    control.push_back({"bootit", std::to_string(flags.bootit)});
    control.push_back({"parallel", flags.parallel ? "TRUE" : "FALSE"});
    control.push_back({"nodes", std::to_string(flags.workers())});
  }
  out << table(control) << "\nCoefficients:\n\n";
  const auto names = f.reported_names();
  const auto est = f.reported_estimates();
  std::vector<std::vector<std::string>> coef;
  if (u) {
    const bool mc = u->kind == IntervalKind::bootstrap_gaussian || u->kind == IntervalKind::bootstrap_quantile;
    std::vector<std::string> head{"", "Estimate", "Lower", "Upper"};
    if (mc) head.insert(head.end(), {"MCSE.lower", "MCSE.upper"});
    coef.push_back(head);
    for (const auto& iv : u->intervals) {
      std::vector<std::string> r{iv.name, fixed(iv.estimate, 5), fixed(iv.lower, 5), fixed(iv.upper, 5)};
      if (mc) r.insert(r.end(), {fixed(iv.mcse_lower, 5), fixed(iv.mcse_upper, 5)});
      coef.push_back(r);
    }
  } else {
    coef.push_back({"", "Estimate"});
    for (std::size_t k = 0; k < est.size(); ++k) coef.push_back({names[k], fixed(est[k], 5)});
  }
  out << table(coef);
  if (!f.structure.is_coefficient(0))
    out << "\nAgreement: " << interpret(f.omega().front()) << "\n";
  std::vector<std::string> warnings = f.warnings;
  if (u) warnings.insert(warnings.end(), u->warnings.begin(), u->warnings.end());
  for (const auto& w : warnings) out << "Warning: " << w << "\n";
  return out.str();
}

inline json fit_json(const Fit& f, const std::string& call, const ModelFlags& flags,
                     const std::optional<UncertaintySummary>& u) {
  json j;
  j["call"] = call;
  j["config"] = {{"input", flags.input},  {"level", to_string(f.data.level())},
                 {"method", to_string(f.method)}, {"structure", to_string(f.structure.kind())},
                 {"dist", margin_label(f)}, {"confint", flags.confint},
                 {"bootit", flags.bootit},  {"workers", flags.workers()},
                 {"seed", flags.seed}};
  j["convergence"] = {{"converged", f.converged}, {"objective", f.loglik}, {"iterations", f.iterations},
                      {"message", f.message}};
  j["units_used"] = f.units.size();
  j["aic"] = aic(f);
  json coef = json::array();
  const auto names = f.reported_names();
  const auto est = f.reported_estimates();
  for (std::size_t k = 0; k < est.size(); ++k) coef.push_back({{"name", names[k]}, {"estimate", est[k]}});
  j["coefficients"] = coef;
  std::vector<std::string> warnings = f.warnings;
  if (u) {
    json iv = json::array();
    for (const auto& x : u->intervals) iv.push_back(interval_json(x));
    j["intervals"] = {{"kind", to_string(u->kind)}, {"level", u->level}, {"n_boot", u->n_boot},
                      {"failed", u->failed}, {"parameters", iv}};
    warnings.insert(warnings.end(), u->warnings.begin(), u->warnings.end());
  }
  j["warnings"] = warnings;
  return j;
}

inline int cmd_fit(const ModelFlags& flags, const std::string& call, std::ostream& out) {
  const AgreementData data = load(flags.input, parse_level(flags.level), flags.categories);
  const ConfintKind ck = parse_confint(flags.confint);
  const FitOptions o = flags.fit_options(data);
  const Fit f = fit(data, o);
  std::optional<UncertaintySummary> u;
  if (ck != ConfintKind::none) {
    if (!f.converged) throw FitError("cannot compute intervals: " + f.message);
    ConfintOptions c;
    c.kind = ck;
    c.n_boot = flags.bootit;
    c.seed = flags.seed;
    c.workers = flags.workers();
    u = confidence_intervals(f, c);
    if (flags.truncate) truncate_intervals(f, *u);
  }
  out << fit_summary(f, call, flags, u);
  if (!flags.json_path.empty()) write_text(flags.json_path, fit_json(f, call, flags, u).dump(2) + "\n", out);
  return f.converged ? ok : fit_failure;
}

inline int cmd_influence(const ModelFlags& flags, const std::string& units, const std::string& coders,
                         const std::string& call, std::ostream& out) {
  const AgreementData data = load(flags.input, parse_level(flags.level), flags.categories);
  const auto drop_u = units.empty() ? std::vector<std::size_t>{} : parse_units(units);
  std::vector<int> drop_c;
  if (!coders.empty())
    for (auto c : parse_units(coders)) drop_c.push_back(static_cast<int>(c));
  if (drop_u.empty() && drop_c.empty()) throw DomainError("influence: give --units and/or --coders");
  for (auto u : drop_u)
    if (u > data.n_units()) throw DomainError("influence: unit " + std::to_string(u) + " is out of range");
  const Fit f = fit(data, flags.fit_options(data));
  if (!f.converged) throw FitError("base fit did not converge: " + f.message);
  const InfluenceReport r = influence(f, drop_u, drop_c);

  out << "Call:\n\n" << call << "\n";
  json j;
  j["call"] = call;
  j["names"] = r.names;
  j["estimate"] = r.estimate;
  auto block = [&](const char* title, const char* key, const std::vector<InfluenceRow>& rows) {
    if (rows.empty()) return;
    std::vector<std::vector<std::string>> t;
    std::vector<std::string> head{""};
    head.insert(head.end(), r.names.begin(), r.names.end());
    head.push_back("delta");
    t.push_back(head);
    json arr = json::array();
    for (const auto& row : rows) {
      std::vector<std::string> line{std::to_string(row.dropped)};
      for (double d : row.dfbeta) line.push_back(fixed(d, 8));
      line.push_back(fixed(row.delta_omega, 4));
      t.push_back(line);
      arr.push_back({{"dropped", row.dropped}, {"dfbeta", row.dfbeta}, {"leave_out", row.leave_out},
                     {"delta_omega", row.delta_omega}, {"converged", row.converged}});
    }
    out << "\n" << title << ":\n\n" << table(t);
    j[key] = arr;
  };
  block("DFBETAs by unit", "units", r.units);
  block("DFBETAs by coder", "coders", r.coders);
  if (!drop_u.empty()) {
    const Level metric = data.level();
    const auto a = alpha_influence(data, metric, drop_u);
    std::vector<std::vector<std::string>> t{{"", "alpha", "alpha.drop", "delta"}};
    json arr = json::array();
    for (const auto& x : a) {
      t.push_back({std::to_string(x.dropped), fixed(x.estimate, 4), fixed(x.leave_out, 4), fixed(x.delta, 4)});
      arr.push_back({{"dropped", x.dropped}, {"estimate", x.estimate}, {"leave_out", x.leave_out}, {"delta", x.delta}});
    }
    out << "\nKrippendorff's alpha (" << to_string(metric) << ") without each unit:\n\n" << table(t);
    j["alpha"] = arr;
  }
  if (!flags.json_path.empty()) write_text(flags.json_path, j.dump(2) + "\n", out);
  return ok;
}

struct AlphaFlags {
  std::string input, level = "interval", metric, json_path;
  std::optional<int> categories;
  std::size_t bootit = 1000, nodes = 0;
  bool parallel = false;
  std::uint64_t seed = 1;
  double confidence = 0.95;
};

inline int cmd_alpha(const AlphaFlags& a, const std::string& call, std::ostream& out) {
  const AgreementData data = load(a.input, parse_level(a.level), a.categories);
  const Level metric = a.metric.empty() ? data.level() : parse_level(a.metric);
  json j{{"call", call}, {"metric", to_string(metric)}};
  out << "Call:\n\n" << call << "\n\n";
  if (a.bootit == 0) {
    const double v = alpha(data, metric);
    out << "Krippendorff's alpha (" << to_string(metric) << "): " << fixed(v, 4) << "\n";
    j["estimate"] = v;
  } else {
    const std::size_t workers = a.parallel ? worker_count(a.nodes) : 1;
    const AlphaResult r = alpha_bootstrap(data, metric, a.bootit, a.seed, a.confidence, workers);
    out << "Krippendorff's alpha (" << to_string(metric) << "): " << fixed(r.estimate, 4) << "\n"
        << "Bootstrap " << fixed(100.0 * a.confidence, 0) << "% interval: (" << fixed(r.lower, 4) << ", "
        << fixed(r.upper, 4) << ")\n"
        << "MCSEs: " << fixed(r.mcse_lower, 4) << ", " << fixed(r.mcse_upper, 4) << " (n_b = " << a.bootit;
    if (r.skipped) out << ", " << r.skipped << " degenerate resamples skipped";
    out << ")\n";
    j["estimate"] = r.estimate;
    j["interval"] = {{"level", r.level},       {"lower", r.lower},           {"upper", r.upper},
                     {"mcse_lower", r.mcse_lower}, {"mcse_upper", r.mcse_upper}, {"n_boot", a.bootit},
                     {"skipped", r.skipped}};
  }
  if (!a.json_path.empty()) write_text(a.json_path, j.dump(2) + "\n", out);
  return ok;
}

struct SimulateFlags {
  std::string dist = "gaussian(0,1)", level, structure = "inter", omega = "0.5", layout, output;
  std::size_t units = 30;
  int coders = 3;
  std::uint64_t seed = 1;
};

inline int cmd_simulate(const SimulateFlags& s, std::ostream& out) {
  const SimulationMargin margin = parse_simulation_margin(s.dist);
  const Level level = s.level.empty() ? sklarsomega::detail::default_level(margin) : parse_level(s.level);
  std::vector<double> omega;
  for (auto tok : sklarsomega::detail::split(s.omega, ',')) {
    const std::string t(sklarsomega::detail::trim(tok));
    try {
      omega.push_back(std::stod(t));
    } catch (const std::exception&) {
      throw DomainError("--omega: '" + t + "' is not a number");
    }
  }
  Rng rng(s.seed);
  AgreementData sim = [&] {
    if (s.layout.empty()) {
      if (parse_structure(s.structure) != StructureKind::inter)
        throw DomainError("simulate: structures other than inter need --layout");
      if (omega.size() != 1) throw DomainError("simulate: inter takes one omega");
      return simulate_inter(omega.front(), margin, s.units, s.coders, level, rng);
    }
    const std::optional<int> k = margin.categorical() ? std::optional<int>(margin.categories()) : std::nullopt;
    const AgreementData layout = load(s.layout, level, k);
    CorrelationStructure cs(parse_structure(s.structure), layout.roles());
    if (omega.size() != cs.n_params()) throw DomainError("simulate: --omega needs one value per parameter");
    return simulate_data(cs, omega, margin, layout, rng);
  }();
  write_text(s.output, write_csv(sim), out);
  return ok;
}

struct StudyFlags {
  std::string scenario = "all", output;
  std::optional<std::size_t> reps, bootit;
  std::optional<std::uint64_t> seed;
  bool parallel = false;
  std::size_t nodes = 0;
};

inline int cmd_study(const StudyFlags& s, std::ostream& out, std::ostream& err) {
  std::vector<Scenario> scenarios;
  if (s.scenario == "all") {
    for (const auto& n : scenario_names()) scenarios.push_back(named_scenario(n));
  } else {
    const auto names = scenario_names();
    if (std::find(names.begin(), names.end(), s.scenario) != names.end()) {
      scenarios.push_back(named_scenario(s.scenario));
    } else {
      std::istringstream in(read_file(s.scenario));
      scenarios.push_back(parse_scenario(in));
    }
  }
  std::string csv = study_csv_header();
  for (auto& sc : scenarios) {
    if (s.reps) sc.reps = *s.reps;
    if (s.bootit) sc.n_boot = *s.bootit;
    if (s.seed) sc.seed = *s.seed;
    err << "running " << sc.name << " (" << sc.reps << " replicates)\n";
    csv += study_csv_rows(run_scenario(sc, s.parallel ? worker_count(s.nodes) : 1));
  }
  write_text(s.output, csv, out);
  return ok;
}

struct PlotFlags {
  std::string kind, input, level = "interval", columns, dist = "gaussian", output;
  std::size_t bins = 0, grid = 201;
};

inline std::size_t column_index(const AgreementData& d, const std::string& name) {
  for (std::size_t c = 0; c < d.n_columns(); ++c)
    if (column_name(d.role(c), d.multi_method()) == name) return c;
  if (auto v = sklarsomega::detail::parse_positive(name); v && static_cast<std::size_t>(*v) <= d.n_columns())
    return static_cast<std::size_t>(*v) - 1;
  throw DomainError("no column '" + name + "'");
}

inline int cmd_export_plot(const PlotFlags& p, std::ostream& out) {
  const AgreementData data = load(p.input, parse_level(p.level));
  std::ostringstream csv;
  csv.precision(17);
  if (p.kind == "bland-altman") {
    std::size_t a = 0, b = 1;
    if (!p.columns.empty()) {
      const auto parts = sklarsomega::detail::split(p.columns, ',');
      if (parts.size() != 2) throw DomainError("--columns needs two column names");
      a = column_index(data, std::string(sklarsomega::detail::trim(parts[0])));
      b = column_index(data, std::string(sklarsomega::detail::trim(parts[1])));
    } else if (data.n_columns() != 2) {
      throw DomainError("bland-altman needs exactly two score columns (or --columns)");
    }
    csv << "mean,difference\n";
    for (std::size_t u = 0; u < data.n_units(); ++u) {
      if (!data.observed(u, a) || !data.observed(u, b)) continue;
      const double x = data.value(u, a), y = data.value(u, b);
      csv << (x + y) / 2.0 << ',' << x - y << '\n';
    }
  } else if (p.kind == "histogram-density") {
    if (is_categorical(data.level())) throw DomainError("histogram-density needs continuous scores");
    const auto v = data.observed_values();
    if (v.size() < 2) throw DegenerateDataError("histogram-density needs at least two scores");
    FitOptions o;
    o.model.margin = parse_margin_kind(p.dist);
    o.model.method = Method::ML;
    const Fit f = fit(data, o);
    const MarginalFamily m = *f.margin();
    const auto [mn, mx] = std::minmax_element(v.begin(), v.end());
    const std::size_t bins =
        p.bins ? p.bins : static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(v.size())))) + 1;
    const double width = (*mx - *mn) / static_cast<double>(bins);
    std::vector<double> count(bins, 0.0);
    for (double y : v) {
      auto k = width > 0.0 ? static_cast<std::size_t>((y - *mn) / width) : 0;
      count[std::min(k, bins - 1)] += 1.0;
    }
    csv << "series,x,x_upper,y\n";
    for (std::size_t k = 0; k < bins; ++k) {
      const double lo = *mn + width * static_cast<double>(k);
      const double dens = width > 0.0 ? count[k] / (static_cast<double>(v.size()) * width) : 0.0;
      csv << "histogram," << lo << ',' << lo + width << ',' << dens << '\n';
    }
    const double lo = std::min(*mn, quantile(m, 1e-4)), hi = std::max(*mx, quantile(m, 1.0 - 1e-4));
    for (std::size_t i = 0; i < p.grid; ++i) {
      const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(p.grid - 1);
      csv << "density," << x << ",," << pdf_or_pmf(m, x) << '\n';
    }
  } else {
    throw DomainError("unknown plot kind '" + p.kind + "'");
  }
  write_text(p.output, csv.str(), out);
  return ok;
}

}  // namespace detail

/// Run the command line; returns the process exit status.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Agreement analysis with Sklar's omega"};
  app.require_subcommand(1);

  detail::ModelFlags fit_flags;
  auto* fit_cmd = app.add_subcommand("fit", "fit the copula model and report estimates");
  fit_flags.add(*fit_cmd, true);

  detail::ModelFlags inf_flags;
  std::string inf_units, inf_coders;
  auto* inf_cmd = app.add_subcommand("influence", "DFBETAs for leaving out units or coders");
  inf_flags.add(*inf_cmd, false);
  inf_cmd->add_option("--units", inf_units, "comma-separated unit numbers");
  inf_cmd->add_option("--coders", inf_coders, "comma-separated coder numbers");

  detail::AlphaFlags alpha_flags;
  auto* alpha_cmd = app.add_subcommand("alpha", "Krippendorff's alpha with a bootstrap interval");
  alpha_cmd->add_option("input", alpha_flags.input, "CSV file of scores")->required();
  alpha_cmd->add_option("--level", alpha_flags.level, "level of measurement")->capture_default_str();
  alpha_cmd->add_option("--metric", alpha_flags.metric, "difference metric (default: the level)");
  alpha_cmd->add_option("--categories", alpha_flags.categories, "number of categories K");
  alpha_cmd->add_option("--bootit", alpha_flags.bootit, "bootstrap size (0 = none)")->capture_default_str();
  alpha_cmd->add_option("--seed", alpha_flags.seed, "random seed")->capture_default_str();
  alpha_cmd->add_option("--confidence", alpha_flags.confidence, "interval level")->capture_default_str();
  alpha_cmd->add_flag("--parallel", alpha_flags.parallel, "use several worker threads");
  alpha_cmd->add_option("--nodes", alpha_flags.nodes, "worker threads (0 = all cores)");
  alpha_cmd->add_option("--json", alpha_flags.json_path, "write a JSON result document");

  detail::SimulateFlags sim_flags;
  auto* sim_cmd = app.add_subcommand("simulate", "draw a dataset from the copula model");
  sim_cmd->add_option("--dist", sim_flags.dist, "margin, e.g. beta(1.5,2), categorical(.2,.8), mixture(w,mu,sd,...)")
      ->capture_default_str();
  sim_cmd->add_option("--level", sim_flags.level, "level of measurement (default from the margin)");
  sim_cmd->add_option("--structure", sim_flags.structure, "correlation structure")->capture_default_str();
  sim_cmd->add_option("--omega", sim_flags.omega, "comma-separated structure parameters")->capture_default_str();
  sim_cmd->add_option("--units", sim_flags.units, "number of units")->capture_default_str();
  sim_cmd->add_option("--coders", sim_flags.coders, "number of coders")->capture_default_str();
  sim_cmd->add_option("--layout", sim_flags.layout, "CSV whose columns and missingness are reused");
  sim_cmd->add_option("--seed", sim_flags.seed, "random seed")->capture_default_str();
  sim_cmd->add_option("-o,--output", sim_flags.output, "output CSV (default stdout)");

  detail::StudyFlags study_flags;
  auto* study_cmd = app.add_subcommand("study", "run simulation-study scenarios");
  study_cmd->add_option("--scenario", study_flags.scenario, "scenario name, scenario file, or all")
      ->capture_default_str();
  study_cmd->add_option("--reps", study_flags.reps, "replicates per scenario");
  study_cmd->add_option("--bootit", study_flags.bootit, "bootstrap size for intervals");
  study_cmd->add_option("--seed", study_flags.seed, "random seed");
  study_cmd->add_flag("--parallel", study_flags.parallel, "use several worker threads");
  study_cmd->add_option("--nodes", study_flags.nodes, "worker threads (0 = all cores)");
  study_cmd->add_option("-o,--output", study_flags.output, "output CSV (default stdout)");

  detail::PlotFlags plot_flags;
  auto* plot_cmd = app.add_subcommand("export-plot", "write plot data as CSV");
  plot_cmd->add_option("--kind", plot_flags.kind, "bland-altman or histogram-density")->required();
  plot_cmd->add_option("input", plot_flags.input, "CSV file of scores")->required();
  plot_cmd->add_option("--level", plot_flags.level, "level of measurement")->capture_default_str();
  plot_cmd->add_option("--columns", plot_flags.columns, "two column names for bland-altman");
  plot_cmd->add_option("--dist", plot_flags.dist, "fitted family for histogram-density")->capture_default_str();
  plot_cmd->add_option("--bins", plot_flags.bins, "histogram bins (default Sturges)");
  plot_cmd->add_option("--grid", plot_flags.grid, "density grid size")->capture_default_str();
  plot_cmd->add_option("-o,--output", plot_flags.output, "output CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? ok : usage;
  }

  const std::string call = detail::call_line(argc, argv);
  try {
    if (fit_cmd->parsed()) return detail::cmd_fit(fit_flags, call, out);
    if (inf_cmd->parsed()) return detail::cmd_influence(inf_flags, inf_units, inf_coders, call, out);
    if (alpha_cmd->parsed()) return detail::cmd_alpha(alpha_flags, call, out);
    if (sim_cmd->parsed()) return detail::cmd_simulate(sim_flags, out);
    if (study_cmd->parsed()) return detail::cmd_study(study_flags, out, err);
    if (plot_cmd->parsed()) return detail::cmd_export_plot(plot_flags, out);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return parse_failure;
  } catch (const DegenerateDataError& e) {
    err << "error: " << e.what() << "\n";
    return degenerate;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return usage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return fit_failure;
  }
  return usage;
}

}  // namespace sklarsomega::cli
