#pragma once

// Case-deletion influence: refit without a unit or a coder and compare.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "sklarsomega/data.hpp"
#include "sklarsomega/error.hpp"
#include "sklarsomega/estimation.hpp"
#include "sklarsomega/kripp_alpha.hpp"
#include "sklarsomega/parallel.hpp"

namespace sklarsomega {

struct InfluenceRow {
  std::size_t dropped = 0;        // unit or coder number (1-based)
  std::vector<double> dfbeta;     // estimate minus leave-out estimate, per reported parameter
  std::vector<double> leave_out;  // leave-out estimates
  double delta_omega = 0.0;       // |omega_drop - omega| / omega, first agreement parameter
  bool converged = true;
};

struct InfluenceReport {
  std::vector<std::string> names;
  std::vector<double> estimate;
  std::vector<InfluenceRow> units;
  std::vector<InfluenceRow> coders;
};

namespace detail {

inline InfluenceRow influence_row(const Fit& f, std::size_t dropped, const AgreementData& data) {
  InfluenceRow row;
  row.dropped = dropped;
  const Fit g = refit(f, data);
  row.converged = g.converged;
  const auto base = f.reported_estimates();
  row.leave_out = g.reported_estimates();
  row.dfbeta.resize(base.size());
  for (std::size_t k = 0; k < base.size(); ++k) row.dfbeta[k] = base[k] - row.leave_out[k];
  const double w = base.front();
  row.delta_omega = w != 0.0 ? std::abs(row.leave_out.front() - w) / std::abs(w) : 0.0;
  return row;
}

inline InfluenceRow unchanged_row(const Fit& f, std::size_t dropped) {
  InfluenceRow row;
  row.dropped = dropped;
  row.leave_out = f.reported_estimates();
  row.dfbeta.assign(row.leave_out.size(), 0.0);
  return row;
}

}  // namespace detail

/// DFBETAs for the listed units and coders (1-based numbers of the input
/// data). Each leave-out refit reuses the fit's model and optimizer options.
/// A unit the fit never used (a singleton) has zero influence.
inline InfluenceReport influence(const Fit& f, const std::vector<std::size_t>& drop_units,
                                 const std::vector<int>& drop_coders, std::size_t workers = 1) {
  InfluenceReport out;
  out.names = f.reported_names();
  out.estimate = f.reported_estimates();
  const std::size_t n_units = drop_units.size();
  out.units.resize(n_units);
  out.coders.resize(drop_coders.size());
  for (auto u : drop_units)
    if (u == 0) throw DomainError("influence: unit numbers start at 1");
  for (int c : drop_coders) {
    const bool known = std::any_of(f.data.roles().begin(), f.data.roles().end(),
                                   [c](const ColumnRole& r) { return !r.gold && r.coder == c; });
    if (!known) throw DomainError("influence: no coder " + std::to_string(c));
  }

  parallel_for(n_units + drop_coders.size(), workers, [&](std::size_t i) {
    if (i < n_units) {
      const std::size_t unit = drop_units[i];
      const auto pos = std::find(f.units.begin(), f.units.end(), unit - 1);
      if (pos == f.units.end()) {
        out.units[i] = detail::unchanged_row(f, unit);
        return;
      }
      const auto local = static_cast<std::size_t>(pos - f.units.begin());
      out.units[i] = detail::influence_row(f, unit, sklarsomega::drop_units(f.data, {local}));
    } else {
      const int coder = drop_coders[i - n_units];
      out.coders[i - n_units] =
          detail::influence_row(f, static_cast<std::size_t>(coder), sklarsomega::drop_coders(f.data, {coder}));
    }
  });
  return out;
}

struct AlphaInfluence {
  std::size_t dropped = 0;  // 1-based unit number
  double estimate = 0.0;
  double leave_out = 0.0;
  double delta = 0.0;       // |alpha_drop - alpha| / alpha
};

/// Relative change in Krippendorff's alpha when each listed unit (1-based) is
/// left out.
inline std::vector<AlphaInfluence> alpha_influence(const AgreementData& data, Level level,
                                                   const std::vector<std::size_t>& drop) {
  const double a = alpha(data, level);
  std::vector<AlphaInfluence> out;
  for (auto unit : drop) {
    if (unit == 0 || unit > data.n_units()) throw DomainError("alpha influence: unit out of range");
    AlphaInfluence r;
    r.dropped = unit;
    r.estimate = a;
    r.leave_out = alpha(sklarsomega::drop_units(data, {unit - 1}), level);
    r.delta = a != 0.0 ? std::abs(r.leave_out - a) / std::abs(a) : 0.0;
    out.push_back(r);
  }
  return out;
}

}  // namespace sklarsomega
