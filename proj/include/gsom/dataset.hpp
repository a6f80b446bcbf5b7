#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "gsom/csv.hpp"
#include "gsom/error.hpp"
#include "gsom/rng.hpp"

namespace gsom {

/// Ordered feature names with per-feature inclusive validity bounds in raw
/// units.
class FeatureSchema {
 public:
  FeatureSchema(std::vector<std::string> names, std::vector<std::pair<double, double>> bounds)
      : names_(std::move(names)), bounds_(std::move(bounds)) {
    require(!names_.empty(), "FeatureSchema: no features");
    require(names_.size() == bounds_.size(), "FeatureSchema: names/bounds size mismatch");
    std::set<std::string> seen;
    for (std::size_t i = 0; i < names_.size(); ++i) {
      require(!names_[i].empty(), "FeatureSchema: empty feature name");
      require(seen.insert(names_[i]).second, "FeatureSchema: duplicate feature '" + names_[i] + "'");
      require(bounds_[i].first <= bounds_[i].second,
              "FeatureSchema: min > max for feature '" + names_[i] + "'");
    }
  }

  /// Unbounded schema (all features valid on the whole real line).
  static FeatureSchema unbounded(std::vector<std::string> names) {
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<std::pair<double, double>> bounds(names.size(), {-inf, inf});
    return FeatureSchema(std::move(names), std::move(bounds));
  }

  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  const std::pair<double, double>& bounds(std::size_t i) const { return bounds_[i]; }

  int index_of(const std::string& name) const {
    for (std::size_t i = 0; i < names_.size(); ++i)
      if (names_[i] == name) return static_cast<int>(i);
    return -1;
  }

 private:
  std::vector<std::string> names_;
  std::vector<std::pair<double, double>> bounds_;
};

/// One panel observation: (individual, time) plus features and categorical
/// attributes. source_row keeps the original file line for error reports.
struct Observation {
  std::string individual;
  std::int64_t time = 0;
  int period = 1;
  std::vector<double> features;
  std::map<std::string, std::string> attributes;
  std::int64_t source_row = 0;
};

/// Immutable table of panel observations sharing one schema.
class SampleTable {
 public:
  SampleTable(FeatureSchema schema, std::vector<Observation> rows)
      : schema_(std::move(schema)), rows_(std::move(rows)) {
    std::map<std::pair<std::string, std::int64_t>, std::int64_t> keys;
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      Observation& r = rows_[i];
      require(r.features.size() == schema_.size(),
              "SampleTable: row " + std::to_string(i + 1) + " has " +
                  std::to_string(r.features.size()) + " features, schema has " +
                  std::to_string(schema_.size()));
      if (r.source_row == 0) r.source_row = static_cast<std::int64_t>(i + 1);
      auto key = std::make_pair(r.individual, r.time);
      auto [it, inserted] = keys.emplace(key, r.source_row);
      require(inserted, "SampleTable: duplicate (individual=" + r.individual +
                            ", time=" + std::to_string(r.time) + ") at rows " +
                            std::to_string(it->second) + " and " + std::to_string(r.source_row));
    }
  }

  const FeatureSchema& schema() const { return schema_; }
  const std::vector<Observation>& rows() const { return rows_; }
  std::size_t size() const { return rows_.size(); }
  bool empty() const { return rows_.empty(); }
  std::size_t feature_count() const { return schema_.size(); }

  /// Per-feature arithmetic mean over all rows.
  std::vector<double> feature_means() const {
    require(!rows_.empty(), "feature_means: empty table");
    std::vector<double> mean(schema_.size(), 0.0);
    for (const auto& r : rows_)
      for (std::size_t d = 0; d < mean.size(); ++d) mean[d] += r.features[d];
    for (double& m : mean) m /= static_cast<double>(rows_.size());
    return mean;
  }

 private:
  FeatureSchema schema_;
  std::vector<Observation> rows_;
};

/// Fitted centering/scaling; stds are population (divide by N).
class Standardization {
 public:
  Standardization(std::vector<double> means, std::vector<double> stds)
      : means_(std::move(means)), stds_(std::move(stds)) {
    require(means_.size() == stds_.size() && !means_.empty(),
            "Standardization: means/stds size mismatch");
    for (double s : stds_) require(s > 0.0, "Standardization: stds must be positive");
  }

  const std::vector<double>& means() const { return means_; }
  const std::vector<double>& stds() const { return stds_; }

  std::vector<double> apply(const std::vector<double>& x) const {
    require(x.size() == means_.size(), "Standardization::apply: dimension mismatch");
    std::vector<double> out(x.size());
    for (std::size_t d = 0; d < x.size(); ++d) out[d] = (x[d] - means_[d]) / stds_[d];
    return out;
  }

  std::vector<double> invert(const std::vector<double>& z) const {
    require(z.size() == means_.size(), "Standardization::invert: dimension mismatch");
    std::vector<double> out(z.size());
    for (std::size_t d = 0; d < z.size(); ++d) out[d] = z[d] * stds_[d] + means_[d];
    return out;
  }

 private:
  std::vector<double> means_;
  std::vector<double> stds_;
};

struct Rejection {
  std::int64_t row_number = 0;
  std::string reason;   // "missing" | "bounds"
  std::string feature;
  double value = 0.0;   // NaN when missing
};

struct RejectionReport {
  std::vector<Rejection> rejections;
  bool empty() const { return rejections.empty(); }
};

/// Keeps rows whose features all lie within schema bounds; rows with a
/// missing (NaN) cell are rejected with reason "missing". Idempotent.
inline std::pair<SampleTable, RejectionReport> clean(const SampleTable& table) {
  std::vector<Observation> kept;
  RejectionReport report;
  const auto& schema = table.schema();
  for (const auto& row : table.rows()) {
    bool ok = true;
    for (std::size_t d = 0; d < schema.size() && ok; ++d) {
      const double v = row.features[d];
      if (std::isnan(v)) {
        report.rejections.push_back({row.source_row, "missing", schema.names()[d], v});
        ok = false;
      } else if (v < schema.bounds(d).first || v > schema.bounds(d).second) {
        report.rejections.push_back({row.source_row, "bounds", schema.names()[d], v});
        ok = false;
      }
    }
    if (ok) kept.push_back(row);
  }
  return {SampleTable(schema, std::move(kept)), std::move(report)};
}

/// Centers and reduces every feature to mean 0, population std 1.
inline std::pair<SampleTable, Standardization> standardize(const SampleTable& table) {
  require(!table.empty(), "standardize: empty table");
  const std::size_t n = table.size();
  const std::size_t dim = table.feature_count();
  std::vector<double> means = table.feature_means();
  std::vector<double> stds(dim, 0.0);
  for (const auto& r : table.rows())
    for (std::size_t d = 0; d < dim; ++d) {
      require(std::isfinite(r.features[d]),
              "standardize: non-finite value in feature '" + table.schema().names()[d] +
                  "' at row " + std::to_string(r.source_row));
      const double diff = r.features[d] - means[d];
      stds[d] += diff * diff;
    }
  for (std::size_t d = 0; d < dim; ++d) {
    stds[d] = std::sqrt(stds[d] / static_cast<double>(n));
    require(stds[d] > 0.0, "standardize: zero variance in feature '" +
                               table.schema().names()[d] + "'");
  }
  Standardization st(std::move(means), std::move(stds));
  std::vector<Observation> rows = table.rows();
  for (auto& r : rows) r.features = st.apply(r.features);
  return {SampleTable(table.schema(), std::move(rows)), std::move(st)};
}

/// Pearson correlation matrix; exactly symmetric with unit diagonal.
inline std::vector<std::vector<double>> correlation_matrix(const SampleTable& table) {
  require(table.size() >= 2, "correlation_matrix: need at least 2 rows");
  const std::size_t dim = table.feature_count();
  std::vector<double> means = table.feature_means();
  std::vector<std::vector<double>> cov(dim, std::vector<double>(dim, 0.0));
  for (const auto& r : table.rows())
    for (std::size_t a = 0; a < dim; ++a) {
      require(std::isfinite(r.features[a]),
              "correlation_matrix: non-finite value in feature '" + table.schema().names()[a] + "'");
      for (std::size_t b = a; b < dim; ++b)
        cov[a][b] += (r.features[a] - means[a]) * (r.features[b] - means[b]);
    }
  for (std::size_t a = 0; a < dim; ++a)
    require(cov[a][a] > 0.0, "correlation_matrix: constant feature '" + table.schema().names()[a] + "'");
  std::vector<std::vector<double>> corr(dim, std::vector<double>(dim, 1.0));
  for (std::size_t a = 0; a < dim; ++a)
    for (std::size_t b = a + 1; b < dim; ++b) {
      const double c = cov[a][b] / (std::sqrt(cov[a][a]) * std::sqrt(cov[b][b]));
      corr[a][b] = c;
      corr[b][a] = c;
    }
  return corr;
}

/// Header -> role mapping for load_samples. Feature columns default to the
/// schema names; `deflator` names an optional per-row multiplier column
/// applied to `deflate_features` at load.
struct ColumnMap {
  std::string individual = "id";
  std::string time = "time";
  std::string period = "period";
  std::map<std::string, std::string> features;
  std::vector<std::string> attributes;
  std::string deflator;
  std::vector<std::string> deflate_features;
};

/// Loads a delimited text file (comma separator, header row, '.' decimal
/// point). Rows keep file order; unknown columns are ignored; empty feature
/// cells load as NaN for clean() to reject.
inline SampleTable load_samples(const std::filesystem::path& path, const FeatureSchema& schema,
                                const ColumnMap& map = {}) {
  CsvFile csv = read_csv(path);
  auto need = [&](const std::string& name) {
    int idx = csv.column(name);
    require(idx >= 0, path.string() + ": missing mapped column '" + name + "'");
    return idx;
  };
  const int id_col = need(map.individual);
  const int time_col = need(map.time);
  const int period_col = need(map.period);
  std::vector<int> feat_cols(schema.size());
  for (std::size_t d = 0; d < schema.size(); ++d) {
    const std::string& name = schema.names()[d];
    auto it = map.features.find(name);
    feat_cols[d] = need(it == map.features.end() ? name : it->second);
  }
  std::vector<int> attr_cols;
  for (const auto& a : map.attributes) attr_cols.push_back(need(a));
  int deflator_col = -1;
  std::vector<char> deflated(schema.size(), 0);
  if (!map.deflator.empty()) {
    deflator_col = need(map.deflator);
    for (const auto& f : map.deflate_features) {
      int idx = schema.index_of(f);
      require(idx >= 0, "load_samples: deflated feature '" + f + "' not in schema");
      deflated[static_cast<std::size_t>(idx)] = 1;
    }
  }

  std::vector<Observation> rows;
  rows.reserve(csv.rows.size());
  for (std::size_t i = 0; i < csv.rows.size(); ++i) {
    const auto& fields = csv.rows[i];
    const std::string where = path.string() + ":" + std::to_string(csv.line_numbers[i]);
    Observation obs;
    obs.source_row = csv.line_numbers[i];
    obs.individual = fields[static_cast<std::size_t>(id_col)];
    require(!obs.individual.empty(), where + ": empty individual id");
    obs.time = parse_int(fields[static_cast<std::size_t>(time_col)], where);
    obs.period = static_cast<int>(parse_int(fields[static_cast<std::size_t>(period_col)], where));
    double deflator = 1.0;
    if (deflator_col >= 0) deflator = parse_double(fields[static_cast<std::size_t>(deflator_col)], where);
    obs.features.resize(schema.size());
    for (std::size_t d = 0; d < schema.size(); ++d) {
      const std::string& cell = fields[static_cast<std::size_t>(feat_cols[d])];
      if (cell.empty()) {
        obs.features[d] = std::numeric_limits<double>::quiet_NaN();
        continue;
      }
      obs.features[d] = parse_double(cell, where);
      if (deflated[d]) obs.features[d] *= deflator;
    }
    for (std::size_t a = 0; a < attr_cols.size(); ++a)
      obs.attributes[map.attributes[a]] = fields[static_cast<std::size_t>(attr_cols[a])];
    rows.push_back(std::move(obs));
  }
  return SampleTable(schema, std::move(rows));
}

/// Writes a table as delimited text; feature values keep full round-trip
/// precision. Columns: id,time,period,<features...>,<attributes...>.
inline std::string serialize_samples(const SampleTable& table) {
  std::set<std::string> attr_keys;
  for (const auto& r : table.rows())
    for (const auto& [k, v] : r.attributes) attr_keys.insert(k);
  std::vector<std::string> header = {"id", "time", "period"};
  for (const auto& n : table.schema().names()) header.push_back(n);
  for (const auto& k : attr_keys) header.push_back(k);
  std::string out = join_csv(header) + "\n";
  for (const auto& r : table.rows()) {
    std::vector<std::string> fields = {r.individual, std::to_string(r.time),
                                       std::to_string(r.period)};
    for (double v : r.features)
      fields.push_back(std::isnan(v) ? std::string() : format_roundtrip(v));
    for (const auto& k : attr_keys) {
      auto it = r.attributes.find(k);
      fields.push_back(it == r.attributes.end() ? std::string() : it->second);
    }
    out += join_csv(fields) + "\n";
  }
  return out;
}

inline void save_samples(const std::filesystem::path& path, const SampleTable& table) {
  atomic_write(path, serialize_samples(table));
}

inline std::string serialize_rejections(const RejectionReport& report) {
  std::string out = "row_number,reason,feature,value\n";
  for (const auto& r : report.rejections) {
    out += std::to_string(r.row_number) + "," + r.reason + "," + r.feature + ",";
    out += std::isnan(r.value) ? "nan" : format_roundtrip(r.value);
    out += "\n";
  }
  return out;
}

/// One mixture component of the synthetic panel generator.
struct GaussianComponent {
  std::vector<double> mean;
  std::vector<double> stddev;  // diagonal covariance, as standard deviations
  double weight = 1.0;
};

struct SyntheticPanelConfig {
  std::vector<GaussianComponent> components;
  int individuals = 100;
  int times = 5;               // rows per individual, time indices 1..times
  double switch_prob = 0.0;    // chance to redraw the component at each step
  int periods = 1;             // period tags split the time axis evenly
  std::vector<std::string> feature_names;  // default f1..fD
  // per-individual categorical attributes: key -> weighted values
  std::vector<std::pair<std::string, std::vector<std::pair<std::string, double>>>> attributes;
};

/// Deterministic Gaussian-mixture panel. Every individual has one row per
/// time index; the generating component is recorded in attribute
/// "component" so cluster recovery can be checked.
inline SampleTable generate_synthetic_panel(const SyntheticPanelConfig& config,
                                            std::uint64_t seed) {
  require(!config.components.empty(), "generate_synthetic_panel: no components");
  require(config.individuals >= 1, "generate_synthetic_panel: individuals must be positive");
  require(config.times >= 1, "generate_synthetic_panel: times must be positive");
  require(config.periods >= 1, "generate_synthetic_panel: periods must be positive");
  require(config.switch_prob >= 0.0 && config.switch_prob <= 1.0,
          "generate_synthetic_panel: switch_prob must lie in [0,1]");
  const std::size_t dim = config.components.front().mean.size();
  require(dim >= 1, "generate_synthetic_panel: zero-dimensional components");
  double total_weight = 0.0;
  for (const auto& comp : config.components) {
    require(comp.mean.size() == dim && comp.stddev.size() == dim,
            "generate_synthetic_panel: component dimension mismatch");
    require(comp.weight > 0.0, "generate_synthetic_panel: non-positive component weight");
    for (double s : comp.stddev)
      require(s > 0.0, "generate_synthetic_panel: non-positive component stddev");
    total_weight += comp.weight;
  }

  std::vector<std::string> names = config.feature_names;
  if (names.empty())
    for (std::size_t d = 0; d < dim; ++d) names.push_back("f" + std::to_string(d + 1));
  require(names.size() == dim, "generate_synthetic_panel: feature_names size mismatch");

  Rng rng(seed);
  auto pick_component = [&]() {
    double u = rng.next_double() * total_weight;
    for (std::size_t c = 0; c < config.components.size(); ++c) {
      u -= config.components[c].weight;
      if (u < 0.0) return c;
    }
    return config.components.size() - 1;
  };

  int id_width = 1;
  for (int n = config.individuals; n >= 10; n /= 10) ++id_width;

  std::vector<Observation> rows;
  rows.reserve(static_cast<std::size_t>(config.individuals) * config.times);
  for (int ind = 1; ind <= config.individuals; ++ind) {
    std::string id = std::to_string(ind);
    id = "i" + std::string(static_cast<std::size_t>(id_width) - id.size(), '0') + id;
    std::map<std::string, std::string> attrs;
    for (const auto& [key, values] : config.attributes) {
      require(!values.empty(), "generate_synthetic_panel: attribute '" + key + "' has no values");
      double total = 0.0;
      for (const auto& [v, w] : values) {
        require(w > 0.0, "generate_synthetic_panel: non-positive attribute weight");
        total += w;
      }
      double u = rng.next_double() * total;
      std::string chosen = values.back().first;
      for (const auto& [v, w] : values) {
        u -= w;
        if (u < 0.0) {
          chosen = v;
          break;
        }
      }
      attrs[key] = chosen;
    }
    std::size_t comp = pick_component();
    for (int t = 1; t <= config.times; ++t) {
      if (t > 1 && config.switch_prob > 0.0 && rng.next_double() < config.switch_prob)
        comp = pick_component();
      Observation obs;
      obs.individual = id;
      obs.time = t;
      obs.period = 1 + ((t - 1) * config.periods) / config.times;
      obs.features.resize(dim);
      const auto& g = config.components[comp];
      for (std::size_t d = 0; d < dim; ++d) obs.features[d] = g.mean[d] + g.stddev[d] * rng.normal();
      obs.attributes = attrs;
      obs.attributes["component"] = std::to_string(comp + 1);
      rows.push_back(std::move(obs));
    }
  }
  return SampleTable(FeatureSchema::unbounded(std::move(names)), std::move(rows));
}

}  // namespace gsom
