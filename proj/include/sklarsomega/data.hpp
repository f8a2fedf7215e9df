#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "sklarsomega/error.hpp"

namespace sklarsomega {

enum class Level { nominal, ordinal, interval, ratio };

inline bool is_categorical(Level level) {
  return level == Level::nominal || level == Level::ordinal;
}

inline std::string to_string(Level level) {
  switch (level) {
    case Level::nominal: return "nominal";
    case Level::ordinal: return "ordinal";
    case Level::interval: return "interval";
    case Level::ratio: return "ratio";
  }
  return "unknown";
}

inline Level parse_level(std::string_view name) {
  if (name == "nominal") return Level::nominal;
  if (name == "ordinal") return Level::ordinal;
  if (name == "interval") return Level::interval;
  if (name == "ratio") return Level::ratio;
  throw ParseError("unknown level of measurement '" + std::string(name) + "'");
}

/// Role of one score column: the gold standard, or score `replicate` of
/// coder `coder` under scoring method `method` (all 1-based).
struct ColumnRole {
  bool gold = false;
  int method = 1;
  int coder = 1;
  int replicate = 1;

  static ColumnRole gold_standard() { return ColumnRole{true, 0, 0, 0}; }
  static ColumnRole score(int method, int coder, int replicate) {
    return ColumnRole{false, method, coder, replicate};
  }

  auto operator<=>(const ColumnRole&) const = default;
};

/// Header token for a role. `multi_method` selects the `m.<m>.<c>.<r>` form.
inline std::string column_name(const ColumnRole& role, bool multi_method) {
  if (role.gold) return "g";
  std::string out = multi_method ? "m." + std::to_string(role.method) + "." : "c.";
  return out + std::to_string(role.coder) + "." + std::to_string(role.replicate);
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r' ||
                        s.front() == '"'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' ||
                        s.back() == '"'))
    s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      return out;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
}

inline std::optional<int> parse_positive(std::string_view s) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || v < 1) return std::nullopt;
  return v;
}

inline bool is_missing_token(std::string_view s) {
  return s.empty() || s == "NA" || s == "na" || s == ".";
}

inline std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace detail

/// Parse one header token: `g`, `c.<coder>.<rep>` or `m.<method>.<coder>.<rep>`.
inline ColumnRole parse_column_name(std::string_view token) {
  if (token == "g") return ColumnRole::gold_standard();
  const auto parts = detail::split(token, '.');
  auto bad = [&] { return ParseError("malformed column name '" + std::string(token) + "'"); };
  if (parts.size() == 3 && parts[0] == "c") {
    auto c = detail::parse_positive(parts[1]);
    auto r = detail::parse_positive(parts[2]);
    if (!c || !r) throw bad();
    return ColumnRole::score(1, *c, *r);
  }
  if (parts.size() == 4 && parts[0] == "m") {
    auto m = detail::parse_positive(parts[1]);
    auto c = detail::parse_positive(parts[2]);
    auto r = detail::parse_positive(parts[3]);
    if (!m || !c || !r) throw bad();
    return ColumnRole::score(*m, *c, *r);
  }
  throw bad();
}

/// Units x columns score matrix with column roles and a missingness mask.
///
/// Categorical levels store category codes 1..K; `category_labels()[k-1]` is
/// the value code k stood for in the source file (identity unless the parser
/// had to remap non-contiguous codes).
class AgreementData {
 public:
  AgreementData() = default;

  /// `values` is row-major n_units x roles.size(); NaN marks a missing cell.
  /// For categorical levels `categories == 0` means "infer K as the maximum
  /// observed code".
  AgreementData(std::size_t n_units, std::vector<ColumnRole> roles, Level level,
                std::vector<double> values, int categories = 0,
                std::vector<double> category_labels = {})
      : n_units_(n_units),
        roles_(std::move(roles)),
        level_(level),
        values_(std::move(values)),
        categories_(categories),
        labels_(std::move(category_labels)) {
    if (values_.size() != n_units_ * roles_.size())
      throw Error("AgreementData: value count does not match units x columns");
    if (std::count_if(roles_.begin(), roles_.end(), [](const ColumnRole& r) { return r.gold; }) > 1)
      throw ParseError("at most one gold-standard column is allowed");
    for (const auto& r : roles_)
      if (!r.gold && (r.method < 1 || r.coder < 1 || r.replicate < 1))
        throw ParseError("method, coder and replicate indices must be positive");
    {
      std::set<ColumnRole> seen(roles_.begin(), roles_.end());
      if (seen.size() != roles_.size()) throw ParseError("duplicate column name");
    }
    if (std::none_of(roles_.begin(), roles_.end(), [](const ColumnRole& r) { return !r.gold; }))
      throw ParseError("no coder score columns");
    mask_.resize(values_.size());
    for (std::size_t i = 0; i < values_.size(); ++i) mask_[i] = !std::isnan(values_[i]);
    for (std::size_t u = 0; u < n_units_; ++u)
      if (observed_count(u) == 0)
        throw DegenerateDataError("unit " + std::to_string(u + 1) + " has no observed score");
    if (is_categorical(level_)) {
      int max_code = 0;
      for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!mask_[i]) continue;
        const double v = values_[i];
        if (v != std::floor(v) || v < 1)
          throw ParseError("categorical scores must be integer codes 1..K");
        max_code = std::max(max_code, static_cast<int>(v));
      }
      if (categories_ == 0) categories_ = max_code;
      if (max_code > categories_)
        throw ParseError("category code " + std::to_string(max_code) + " exceeds K=" +
                         std::to_string(categories_));
      if (labels_.empty())
        for (int k = 1; k <= categories_; ++k) labels_.push_back(k);
      if (static_cast<int>(labels_.size()) != categories_)
        throw Error("AgreementData: category label count must equal K");
    } else {
      categories_ = 0;
      labels_.clear();
    }
  }

  std::size_t n_units() const { return n_units_; }
  std::size_t n_columns() const { return roles_.size(); }
  const std::vector<ColumnRole>& roles() const { return roles_; }
  const ColumnRole& role(std::size_t col) const { return roles_[col]; }
  Level level() const { return level_; }
  int categories() const { return categories_; }
  const std::vector<double>& category_labels() const { return labels_; }

  double value(std::size_t unit, std::size_t col) const { return values_[unit * roles_.size() + col]; }
  bool observed(std::size_t unit, std::size_t col) const { return mask_[unit * roles_.size() + col] != 0; }
  const std::vector<double>& values() const { return values_; }

  std::size_t observed_count(std::size_t unit) const {
    std::size_t n = 0;
    for (std::size_t c = 0; c < roles_.size(); ++c) n += observed(unit, c);
    return n;
  }

  std::size_t n_observed() const {
    return static_cast<std::size_t>(std::count(mask_.begin(), mask_.end(), std::uint8_t{1}));
  }

  bool has_gold() const {
    return std::any_of(roles_.begin(), roles_.end(), [](const ColumnRole& r) { return r.gold; });
  }

  bool multi_method() const {
    return std::any_of(roles_.begin(), roles_.end(),
                       [](const ColumnRole& r) { return !r.gold && r.method > 1; });
  }

  /// All observed scores in row-major order.
  std::vector<double> observed_values() const {
    std::vector<double> out;
    out.reserve(values_.size());
    for (std::size_t i = 0; i < values_.size(); ++i)
      if (mask_[i]) out.push_back(values_[i]);
    return out;
  }

  /// Throws DegenerateDataError unless at least two units carry two or more
  /// observed scores (otherwise no dependence parameter is estimable).
  void require_estimable() const {
    std::size_t paired = 0;
    for (std::size_t u = 0; u < n_units_; ++u) paired += observed_count(u) >= 2;
    if (paired < 2)
      throw DegenerateDataError("fewer than two units have two or more observed scores");
  }

  friend bool operator==(const AgreementData& a, const AgreementData& b) {
    if (a.n_units_ != b.n_units_ || a.roles_ != b.roles_ || a.level_ != b.level_ ||
        a.categories_ != b.categories_ || a.labels_ != b.labels_ || a.mask_ != b.mask_)
      return false;
    for (std::size_t i = 0; i < a.values_.size(); ++i)
      if (a.mask_[i] && a.values_[i] != b.values_[i]) return false;
    return true;
  }

 private:
  std::size_t n_units_ = 0;
  std::vector<ColumnRole> roles_;
  Level level_ = Level::interval;
  std::vector<double> values_;
  std::vector<std::uint8_t> mask_;
  int categories_ = 0;
  std::vector<double> labels_;
};

/// Observed column indices of one unit, in header order.
inline std::vector<std::size_t> observed_pattern(const AgreementData& data, std::size_t unit) {
  if (unit >= data.n_units()) throw DomainError("unit index out of range");
  std::vector<std::size_t> cols;
  for (std::size_t c = 0; c < data.n_columns(); ++c)
    if (data.observed(unit, c)) cols.push_back(c);
  return cols;
}

/// Parse a CSV with a header row of column-role tokens. Rows without any
/// observed score are skipped. For categorical levels without a `categories`
/// override, codes that are not exactly {1..max} are remapped to 1..K in
/// increasing order and the original values kept as category labels.
inline AgreementData parse_csv(std::istream& in, Level level,
                               std::optional<int> categories = std::nullopt) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<ColumnRole> roles;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    for (auto token : detail::split(line, ',')) roles.push_back(parse_column_name(token));
    break;
  }
  if (roles.empty()) throw ParseError("empty input: no header row");

  std::vector<double> values;
  std::size_t n_units = 0;
  std::size_t skipped = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split(line, ',');
    if (cells.size() != roles.size())
      throw ParseError("line " + std::to_string(line_no) + ": expected " +
                       std::to_string(roles.size()) + " cells, found " + std::to_string(cells.size()));
    std::vector<double> row(roles.size(), std::numeric_limits<double>::quiet_NaN());
    bool any = false;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (detail::is_missing_token(cells[c])) continue;
      double v = 0;
      auto [ptr, ec] = std::from_chars(cells[c].data(), cells[c].data() + cells[c].size(), v);
      if (ec != std::errc{} || ptr != cells[c].data() + cells[c].size() || !std::isfinite(v))
        throw ParseError("line " + std::to_string(line_no) + ": non-numeric cell '" +
                         std::string(cells[c]) + "'");
      row[c] = v;
      any = true;
    }
    if (!any) {
      ++skipped;
      continue;
    }
    values.insert(values.end(), row.begin(), row.end());
    ++n_units;
  }
  if (n_units == 0) throw ParseError("no usable units (every row is empty or missing)");

  std::vector<double> labels;
  int k = categories.value_or(0);
  if (is_categorical(level) && !categories) {
    std::set<double> distinct;
    for (double v : values)
      if (!std::isnan(v)) distinct.insert(v);
    bool contiguous = true;
    int expect = 1;
    for (double v : distinct) contiguous = contiguous && v == expect++;
    if (!contiguous) {
      std::map<double, int> code;
      for (double v : distinct) {
        labels.push_back(v);
        code[v] = static_cast<int>(labels.size());
      }
      for (double& v : values)
        if (!std::isnan(v)) v = code[v];
    }
  }
  return AgreementData(n_units, std::move(roles), level, std::move(values), k, std::move(labels));
}

inline AgreementData parse_csv(std::string_view text, Level level,
                               std::optional<int> categories = std::nullopt) {
  std::istringstream in{std::string(text)};
  return parse_csv(in, level, categories);
}

/// Serialize with the same header grammar; missing cells are written as NA.
/// Categorical cells are written as their original labels.
inline std::string write_csv(const AgreementData& data) {
  std::string out;
  const bool multi = data.multi_method();
  for (std::size_t c = 0; c < data.n_columns(); ++c) {
    if (c) out += ',';
    out += column_name(data.role(c), multi);
  }
  out += '\n';
  const bool cat = is_categorical(data.level());
  for (std::size_t u = 0; u < data.n_units(); ++u) {
    for (std::size_t c = 0; c < data.n_columns(); ++c) {
      if (c) out += ',';
      if (!data.observed(u, c)) {
        out += "NA";
        continue;
      }
      const double v = data.value(u, c);
      out += detail::format_double(cat ? data.category_labels()[static_cast<std::size_t>(v) - 1] : v);
    }
    out += '\n';
  }
  return out;
}

/// Copy of `data` restricted to the given units (in the given order; repeats allowed).
inline AgreementData select_units(const AgreementData& data, const std::vector<std::size_t>& units) {
  std::vector<double> values;
  values.reserve(units.size() * data.n_columns());
  for (auto u : units)
    for (std::size_t c = 0; c < data.n_columns(); ++c) values.push_back(data.value(u, c));
  return AgreementData(units.size(), data.roles(), data.level(), std::move(values),
                       data.categories(), data.category_labels());
}

/// Copy of `data` without the listed units (0-based).
inline AgreementData drop_units(const AgreementData& data, const std::vector<std::size_t>& units) {
  std::vector<std::size_t> keep;
  for (std::size_t u = 0; u < data.n_units(); ++u)
    if (std::find(units.begin(), units.end(), u) == units.end()) keep.push_back(u);
  if (keep.empty()) throw DegenerateDataError("dropping every unit leaves no data");
  return select_units(data, keep);
}

/// Copy of `data` without any column scored by the listed coders (1-based,
/// every method and replicate). Units left with no observed score are removed.
inline AgreementData drop_coders(const AgreementData& data, const std::vector<int>& coders) {
  std::vector<std::size_t> cols;
  for (std::size_t c = 0; c < data.n_columns(); ++c) {
    const auto& r = data.role(c);
    if (r.gold || std::find(coders.begin(), coders.end(), r.coder) == coders.end()) cols.push_back(c);
  }
  std::vector<ColumnRole> roles;
  for (auto c : cols) roles.push_back(data.role(c));
  std::vector<double> values;
  std::size_t n = 0;
  for (std::size_t u = 0; u < data.n_units(); ++u) {
    bool any = false;
    for (auto c : cols) any = any || data.observed(u, c);
    if (!any) continue;
    for (auto c : cols) values.push_back(data.value(u, c));
    ++n;
  }
  if (n == 0) throw DegenerateDataError("dropping these coders leaves no data");
  return AgreementData(n, std::move(roles), data.level(), std::move(values), data.categories(),
                       data.category_labels());
}

/// Units with at least two observed scores, in order.
inline std::vector<std::size_t> paired_units(const AgreementData& data) {
  std::vector<std::size_t> out;
  for (std::size_t u = 0; u < data.n_units(); ++u)
    if (data.observed_count(u) >= 2) out.push_back(u);
  return out;
}

/// Empirical category proportions p_1..p_K over all observed cells.
inline std::vector<double> category_proportions(const AgreementData& data) {
  if (!is_categorical(data.level())) throw DomainError("category proportions need a categorical level");
  std::vector<double> p(static_cast<std::size_t>(data.categories()), 0.0);
  const auto obs = data.observed_values();
  for (double v : obs) p[static_cast<std::size_t>(v) - 1] += 1.0;
  for (double& x : p) x /= static_cast<double>(obs.size());
  return p;
}

}  // namespace sklarsomega
