// gsom command line: self-organizing maps over graph lattices, quantization
// quality indicators, macro-class tables, and Markov trajectory analysis.
//
// Pipeline: synth/clean -> train -> assign -> tables -> transitions -> report.
// Exit codes: 0 success, 1 runtime/data error, 2 usage/config error.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gsom/gsom.hpp"

namespace fs = std::filesystem;

namespace {

/// Bad flag/config values; mapped to exit code 2.
struct UsageError : std::runtime_error {
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t pos = s.find(sep, start);
    if (pos == std::string::npos) {
      if (start < s.size()) out.push_back(s.substr(start));
      break;
    }
    if (pos > start) out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

double usage_double(const std::string& s, const std::string& what) {
  try {
    return gsom::parse_double(s, what);
  } catch (const gsom::Error& e) {
    throw UsageError(e.what());
  }
}

std::int64_t usage_int(const std::string& s, const std::string& what) {
  try {
    return gsom::parse_int(s, what);
  } catch (const gsom::Error& e) {
    throw UsageError(e.what());
  }
}

std::string safe_filename(const std::string& name) {
  std::string out;
  for (char c : name) out += (std::isalnum(static_cast<unsigned char>(c)) != 0) ? c : '_';
  return out;
}

// ---------------------------------------------------------------------------
// data loading options shared by the pipeline commands

struct DataOpts {
  std::string path;
  std::string schema_spec;  // "name[:min:max],..."; empty: infer from header
  std::string id_col = "id";
  std::string time_col = "time";
  std::string period_col = "period";
  std::vector<std::string> attributes;
  std::string deflator_col;
  std::string deflate_features;
};

void add_data_options(CLI::App* cmd, DataOpts& opts, bool require_data = true) {
  auto* data = cmd->add_option("--data", opts.path, "input samples (csv with header)");
  if (require_data) data->required();
  cmd->add_option("--schema", opts.schema_spec,
                  "feature list 'name[:min:max],...'; default: every unmapped column");
  cmd->add_option("--id-col", opts.id_col, "individual id column");
  cmd->add_option("--time-col", opts.time_col, "time column");
  cmd->add_option("--period-col", opts.period_col, "period column");
  cmd->add_option("--attributes", opts.attributes, "categorical columns to keep")
      ->delimiter(',');
  cmd->add_option("--deflator", opts.deflator_col, "per-row multiplier column");
  cmd->add_option("--deflate", opts.deflate_features,
                  "comma list of features the multiplier applies to");
}

gsom::FeatureSchema parse_schema(const std::string& spec) {
  std::vector<std::string> names;
  std::vector<std::pair<double, double>> bounds;
  const double inf = std::numeric_limits<double>::infinity();
  for (const auto& token : split(spec, ',')) {
    const auto parts = split(token, ':');
    if (parts.size() == 1) {
      names.push_back(parts[0]);
      bounds.emplace_back(-inf, inf);
    } else if (parts.size() == 3) {
      names.push_back(parts[0]);
      bounds.emplace_back(usage_double(parts[1], "schema bound"),
                          usage_double(parts[2], "schema bound"));
    } else {
      throw UsageError("bad schema token '" + token + "' (want name or name:min:max)");
    }
  }
  if (names.empty()) throw UsageError("empty schema");
  try {
    return gsom::FeatureSchema(std::move(names), std::move(bounds));
  } catch (const gsom::Error& e) {
    throw UsageError(e.what());
  }
}

gsom::SampleTable load_table(const DataOpts& opts) {
  gsom::ColumnMap map;
  map.individual = opts.id_col;
  map.time = opts.time_col;
  map.period = opts.period_col;
  map.attributes = opts.attributes;
  map.deflator = opts.deflator_col;
  map.deflate_features = split(opts.deflate_features, ',');

  if (!opts.schema_spec.empty())
    return gsom::load_samples(opts.path, parse_schema(opts.schema_spec), map);

  // infer the schema from the header: every column without another role
  const auto csv = gsom::read_csv(opts.path);
  std::set<std::string> taken = {opts.id_col, opts.time_col, opts.period_col};
  if (!opts.deflator_col.empty()) taken.insert(opts.deflator_col);
  for (const auto& a : opts.attributes) taken.insert(a);
  std::vector<std::string> names;
  for (const auto& column : csv.header)
    if (taken.count(column) == 0) names.push_back(column);
  if (names.empty()) throw UsageError("no feature columns left after role mapping");
  return gsom::load_samples(opts.path, gsom::FeatureSchema::unbounded(names), map);
}

// ---------------------------------------------------------------------------
// topology / macro / training options

gsom::MapTopology parse_topology(const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw UsageError("invalid topology spec '" + spec + "'");
  const std::string kind = spec.substr(0, colon);
  const std::string rest = spec.substr(colon + 1);
  if (kind == "adjacency") return gsom::load_adjacency(rest);
  const auto x = rest.find('x');
  if (x == std::string::npos) throw UsageError("invalid topology spec '" + spec + "'");
  const auto a = usage_int(rest.substr(0, x), "topology spec");
  const auto b = usage_int(rest.substr(x + 1), "topology spec");
  if (a < 1 || b < 1) throw UsageError("invalid topology spec '" + spec + "'");
  if (kind == "grid") return gsom::MapTopology::grid(static_cast<int>(a), static_cast<int>(b));
  if (kind == "strings")
    return gsom::MapTopology::strings(static_cast<int>(a), static_cast<int>(b));
  if (kind == "star") return gsom::MapTopology::star(static_cast<int>(a), static_cast<int>(b));
  throw UsageError("invalid topology spec '" + spec + "'");
}

gsom::MacroPartition make_partition(const std::string& macro_spec, const gsom::MapTopology& topo,
                                    const gsom::CodebookMap* map) {
  std::string spec = macro_spec;
  if (spec.empty()) {
    switch (topo.kind()) {
      case gsom::LatticeKind::Strings: spec = "components"; break;
      case gsom::LatticeKind::Star: spec = "star_rays"; break;
      default: spec = "hac:" + std::to_string(std::min(5, topo.unit_count())); break;
    }
  }
  if (spec == "components") return gsom::macro_from_components(topo);
  if (spec == "star_rays") {
    if (topo.kind() != gsom::LatticeKind::Star)
      throw UsageError("macro method star_rays requires a star topology");
    return gsom::macro_from_star(topo);
  }
  if (spec.rfind("hac:", 0) == 0) {
    const auto s = usage_int(spec.substr(4), "macro spec");
    if (s < 1 || s > topo.unit_count())
      throw UsageError("macro class count out of range 1.." + std::to_string(topo.unit_count()));
    if (map == nullptr) throw UsageError("macro method hac needs a trained codebook");
    return gsom::hac(*map, static_cast<int>(s)).first;
  }
  throw UsageError("invalid macro spec '" + spec + "' (components | star_rays | hac:S)");
}

struct TrainOpts {
  std::string topology = "strings:5x8";
  std::string macro;  // empty: by topology kind
  int epochs = 20;
  double alpha_start = 0.5;
  double alpha_end = 0.01;
  double sigma_start = 0.0;  // 0: auto
  double sigma_end = 0.5;
  std::string kernel = "gaussian";
  bool no_standardize = false;
};

void add_train_options(CLI::App* cmd, TrainOpts& opts) {
  cmd->add_option("--topology", opts.topology,
                  "grid:RxC | strings:NxL | star:NxL | adjacency:FILE");
  cmd->add_option("--macro", opts.macro, "components | star_rays | hac:S");
  cmd->add_option("--epochs", opts.epochs, "training epochs");
  cmd->add_option("--alpha-start", opts.alpha_start, "initial learning rate");
  cmd->add_option("--alpha-end", opts.alpha_end, "final learning rate");
  cmd->add_option("--sigma-start", opts.sigma_start, "initial radius (0 = half map diameter)");
  cmd->add_option("--sigma-end", opts.sigma_end, "final radius");
  cmd->add_option("--kernel", opts.kernel, "gaussian | indicator")
      ->check(CLI::IsMember({"gaussian", "indicator"}));
  cmd->add_flag("--no-standardize", opts.no_standardize, "train on raw feature values");
}

gsom::TrainingConfig make_config(const TrainOpts& opts, std::uint64_t seed,
                                 const gsom::MapTopology& topo) {
  gsom::TrainingConfig cfg;
  cfg.epochs = opts.epochs;
  cfg.alpha_start = opts.alpha_start;
  cfg.alpha_end = opts.alpha_end;
  cfg.sigma_start = opts.sigma_start;
  cfg.sigma_end = opts.sigma_end;
  cfg.kernel = opts.kernel == "indicator" ? gsom::Kernel::Indicator : gsom::Kernel::Gaussian;
  cfg.seed = seed;
  try {
    return cfg.resolved(topo);
  } catch (const gsom::Error& e) {
    throw UsageError(e.what());
  }
}

// ---------------------------------------------------------------------------
// table serializers

std::string class_means_csv(const gsom::ClassMeansTable& table) {
  std::string out = "feature";
  const int s_count = static_cast<int>(table.class_sizes.size());
  for (int s = 1; s <= s_count; ++s) out += ",class_" + std::to_string(s);
  out += ",sample,max_class\n";
  out += "size";
  for (auto n : table.class_sizes) out += "," + std::to_string(n);
  out += "," + std::to_string(table.sample_size) + ",\n";
  for (std::size_t d = 0; d < table.feature_names.size(); ++d) {
    out += table.feature_names[d];
    for (int s = 0; s < s_count; ++s) {
      const double v = table.class_means[static_cast<std::size_t>(s)][d];
      out += ",";
      if (!std::isnan(v)) out += gsom::format_sig(v);
    }
    out += "," + gsom::format_sig(table.sample_mean[d]);
    out += "," + std::to_string(table.max_class[d]) + "\n";
  }
  return out;
}

std::string cross_tab_csv(const gsom::CrossTab& tab) {
  std::string out = "class";
  for (std::size_t j = 0; j < tab.col_totals.size(); ++j) out += ",b" + std::to_string(j + 1);
  out += ",total\n";
  for (std::size_t i = 0; i < tab.counts.size(); ++i) {
    out += "a" + std::to_string(i + 1);
    for (auto c : tab.counts[i]) out += "," + std::to_string(c);
    out += "," + std::to_string(tab.row_totals[i]) + "\n";
  }
  out += "total";
  for (auto c : tab.col_totals) out += "," + std::to_string(c);
  out += "," + std::to_string(tab.grand_total) + "\n";
  return out;
}

std::string slice_csv(const gsom::SliceTable& slice) {
  std::string out = "value,n";
  for (int s = 1; s <= slice.class_count; ++s) out += ",class_" + std::to_string(s);
  out += "\n";
  for (std::size_t v = 0; v < slice.values.size(); ++v) {
    out += slice.values[v] + "," + std::to_string(slice.value_counts[v]);
    for (double pct : slice.percent[v]) out += "," + gsom::format_fixed(pct, 2);
    out += "\n";
  }
  return out;
}

/// Rounds a probability row to percent hundredths summing to exactly 10000
/// (largest remainder), so printed rows add up to 100.00.
std::vector<long> percent_hundredths(const gsom::TransitionMatrix& tm, int i) {
  const int s = tm.state_count();
  std::vector<long> cells(static_cast<std::size_t>(s));
  if (tm.row_count(i) == 0) return cells;  // unobserved source state: all zeros
  std::vector<std::pair<double, int>> remainders;
  long assigned = 0;
  for (int j = 1; j <= s; ++j) {
    const double exact = 10000.0 * tm.prob(i, j);
    const double floored = std::floor(exact);
    cells[static_cast<std::size_t>(j) - 1] = static_cast<long>(floored);
    assigned += static_cast<long>(floored);
    remainders.emplace_back(-(exact - floored), j - 1);  // sort: biggest remainder first
  }
  std::sort(remainders.begin(), remainders.end());
  for (long leftover = 10000 - assigned; leftover > 0; --leftover)
    ++cells[static_cast<std::size_t>(
        remainders[static_cast<std::size_t>(10000 - assigned - leftover)].second)];
  return cells;
}

std::string percent_matrix_csv(const gsom::TransitionMatrix& tm) {
  std::string out = "class";
  for (int j = 1; j <= tm.state_count(); ++j) out += ",to_" + std::to_string(j);
  out += "\n";
  for (int i = 1; i <= tm.state_count(); ++i) {
    out += std::to_string(i);
    for (long cell : percent_hundredths(tm, i))
      out += "," + gsom::format_fixed(static_cast<double>(cell) / 100.0, 2);
    out += "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// subcommands

struct GlobalOpts {
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  bool percent = false;
  fs::path out(const std::string& name) const { return fs::path(out_dir) / name; }
};

struct SynthOpts {
  std::vector<std::string> components;  // "m1:m2|s1:s2|w"
  std::vector<std::string> attributes;  // "key=v1:w1,v2:w2"
  std::string feature_names;
  int individuals = 200;
  int times = 5;
  int periods = 2;
  double switch_prob = 0.0;
};

void run_synth(const GlobalOpts& global, const SynthOpts& opts) {
  gsom::SyntheticPanelConfig config;
  if (opts.components.empty()) {
    // bundled benchmark: five well-separated planar clusters
    config.components = {
        {{0.0, 0.0}, {1.0, 1.0}, 1.0},  {{10.0, 0.0}, {1.0, 1.0}, 1.0},
        {{0.0, 10.0}, {1.0, 1.0}, 1.0}, {{10.0, 10.0}, {1.0, 1.0}, 1.0},
        {{5.0, 5.0}, {1.0, 1.0}, 1.0},
    };
  } else {
    for (const auto& spec : opts.components) {
      const auto parts = split(spec, '|');
      if (parts.size() != 3)
        throw UsageError("bad component '" + spec + "' (want mean|std|weight)");
      gsom::GaussianComponent comp;
      for (const auto& v : split(parts[0], ':'))
        comp.mean.push_back(usage_double(v, "component mean"));
      for (const auto& v : split(parts[1], ':'))
        comp.stddev.push_back(usage_double(v, "component std"));
      comp.weight = usage_double(parts[2], "component weight");
      config.components.push_back(std::move(comp));
    }
  }
  for (const auto& spec : opts.attributes) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos)
      throw UsageError("bad attribute '" + spec + "' (want key=v:w,...)");
    std::vector<std::pair<std::string, double>> values;
    for (const auto& token : split(spec.substr(eq + 1), ',')) {
      const auto parts = split(token, ':');
      if (parts.size() != 2) throw UsageError("bad attribute value '" + token + "'");
      values.emplace_back(parts[0], usage_double(parts[1], "attribute weight"));
    }
    config.attributes.emplace_back(spec.substr(0, eq), std::move(values));
  }
  config.feature_names = split(opts.feature_names, ',');
  config.individuals = opts.individuals;
  config.times = opts.times;
  config.periods = opts.periods;
  config.switch_prob = opts.switch_prob;

  const auto table = gsom::generate_synthetic_panel(config, global.seed);
  gsom::save_samples(global.out("samples.csv"), table);
  std::cout << "wrote " << global.out("samples.csv").string() << " (" << table.size()
            << " rows)\n";
}

void run_clean(const GlobalOpts& global, const DataOpts& data) {
  const auto table = load_table(data);
  const auto [kept, report] = gsom::clean(table);
  gsom::save_samples(global.out("cleaned.csv"), kept);
  gsom::atomic_write(global.out("rejections.csv"), gsom::serialize_rejections(report));
  std::cout << "kept " << kept.size() << " of " << table.size() << " rows; "
            << report.rejections.size() << " rejected\n";
}

struct TrainedArtifacts {
  gsom::CodebookMap map;
  gsom::SampleTable table;  // training-space table (standardized unless disabled)
  std::vector<int> labels;
  gsom::MacroPartition partition;
  std::optional<gsom::Standardization> standardization;
};

TrainedArtifacts train_pipeline(const DataOpts& data, const TrainOpts& train, std::uint64_t seed,
                                const GlobalOpts& global, bool write_rejections) {
  auto loaded = load_table(data);
  auto [cleaned, report] = gsom::clean(loaded);
  if (!report.empty()) {
    std::cerr << "clean: rejected " << report.rejections.size() << " of " << loaded.size()
              << " rows\n";
    if (write_rejections)
      gsom::atomic_write(global.out("rejections.csv"), gsom::serialize_rejections(report));
  }

  std::optional<gsom::Standardization> st;
  gsom::SampleTable table = std::move(cleaned);
  if (!train.no_standardize) {
    auto [standardized, fitted] = gsom::standardize(table);
    table = std::move(standardized);
    st = std::move(fitted);
  }

  auto topo = parse_topology(train.topology);
  const auto cfg = make_config(train, seed, topo);
  auto map = gsom::train(table, topo, cfg);
  auto labels = gsom::assign(map, table);
  auto partition = make_partition(train.macro, topo, &map);
  return {std::move(map), std::move(table), std::move(labels), std::move(partition),
          std::move(st)};
}

void run_train(const GlobalOpts& global, const DataOpts& data, const TrainOpts& train) {
  auto art = train_pipeline(data, train, global.seed, global, true);
  gsom::save_codebook(global.out("codebook.txt"), art.map);
  gsom::save_labels(global.out("labels.csv"), art.table, art.labels);
  gsom::save_partition(global.out("partition.txt"), art.partition);
  if (art.standardization)
    gsom::atomic_write(
        global.out("standardization.csv"),
        gsom::serialize_standardization(*art.standardization, art.table.schema().names()));
  const auto report = gsom::quality_report(art.map, art.table, &art.labels, &art.partition);
  gsom::atomic_write(global.out("quality.txt"), gsom::serialize_quality(report));
  std::cout << "trained " << art.map.topology.descriptor()
            << ": rqe=" << gsom::format_fixed(100.0 * report.rqe, 2)
            << "% rqe_ext=" << gsom::format_fixed(100.0 * report.rqe_ext, 2) << "%";
  if (report.rqe_macro)
    std::cout << " rqe_macro=" << gsom::format_fixed(100.0 * *report.rqe_macro, 2) << "%";
  std::cout << "\n";
}

void run_compare(const GlobalOpts& global, const DataOpts& data, const TrainOpts& base,
                 const std::vector<std::string>& topologies, int macro_classes) {
  if (topologies.size() < 2) throw UsageError("compare needs >=2 topologies");
  std::string out = "topology,rqe,rqe_ext,rqe_macro\n";
  for (const auto& spec : topologies) {
    TrainOpts train = base;
    train.topology = spec;
    train.macro.clear();
    const auto topo_probe = parse_topology(spec);
    if (topo_probe.kind() == gsom::LatticeKind::Grid ||
        topo_probe.kind() == gsom::LatticeKind::Custom)
      train.macro = "hac:" + std::to_string(std::min(macro_classes, topo_probe.unit_count()));
    auto art = train_pipeline(data, train, global.seed, global, false);
    const auto report = gsom::quality_report(art.map, art.table, &art.labels, &art.partition);
    out += spec + "," + gsom::format_fixed(100.0 * report.rqe, 2) + "," +
           gsom::format_fixed(100.0 * report.rqe_ext, 2) + "," +
           gsom::format_fixed(100.0 * report.rqe_macro.value_or(0.0), 2) + "\n";
  }
  gsom::atomic_write(global.out("comparison.csv"), out);
  std::cout << out;
}

void run_hac_curve(const GlobalOpts& global, const DataOpts& data, const TrainOpts& train) {
  const auto topo_probe = parse_topology(train.topology);
  if (topo_probe.kind() != gsom::LatticeKind::Grid)
    std::cerr << "note: hac-curve is usually run on a grid map (got " << topo_probe.descriptor()
              << ")\n";
  TrainOpts opts = train;
  opts.macro = "hac:" + std::to_string(std::min(5, topo_probe.unit_count()));
  auto art = train_pipeline(data, opts, global.seed, global, false);

  const auto trace = gsom::hac_merge_sequence(art.map);
  const int k = art.map.unit_count();
  std::string csv = "classes,rqe_macro,rqe_macro_percent\n";
  gsom::svg::Series series;
  series.label = "rqe_macro";
  for (int s = 1; s <= k; ++s) {
    const auto part = gsom::hac_partition_at(trace, k, s);
    const auto macro = gsom::rqe_macro(art.table, art.labels, part);
    csv += std::to_string(s) + "," + gsom::format_sig(macro.ratio) + "," +
           gsom::format_fixed(100.0 * macro.ratio, 2) + "\n";
    series.points.emplace_back(s, 100.0 * macro.ratio);
  }
  gsom::atomic_write(global.out("hac_curve.csv"), csv);
  gsom::atomic_write(global.out("hac_curve.svg"),
                     gsom::svg::line_chart("macro quantization error by class count",
                                           "macro-classes", "rqe_macro (%)", {series}, false));
  std::cout << "wrote " << global.out("hac_curve.csv").string() << " (" << k << " points)\n";
}

void run_assign(const GlobalOpts& global, const DataOpts& data, const std::string& codebook_path,
                const std::string& standardization_path) {
  const auto map = gsom::load_codebook(codebook_path);
  auto table = load_table(data);
  if (!standardization_path.empty()) {
    const auto st = gsom::load_standardization(standardization_path, table.schema());
    std::vector<gsom::Observation> rows = table.rows();
    for (auto& r : rows) r.features = st.apply(r.features);
    table = gsom::SampleTable(table.schema(), std::move(rows));
  }
  const auto labels = gsom::assign(map, table);
  gsom::save_labels(global.out("labels.csv"), table, labels);
  std::cout << "wrote " << global.out("labels.csv").string() << " (" << labels.size()
            << " rows)\n";
}

void run_tables(const GlobalOpts& global, const DataOpts& data, const std::string& labels_path,
                const std::string& partition_path, const std::string& cross_labels_path,
                const std::string& cross_partition_path,
                const std::vector<std::string>& slices) {
  const auto table = load_table(data);
  const auto labels = gsom::load_labels(labels_path, table);
  const auto partition = gsom::load_partition(partition_path);

  const auto means = gsom::class_means(table, labels, partition);
  gsom::atomic_write(global.out("class_means.csv"), class_means_csv(means));
  for (int empty : means.empty_classes)
    std::cerr << "note: macro-class " << empty << " has no members\n";

  const auto class_labels = gsom::to_class_labels(labels, partition);
  if (!cross_labels_path.empty() || !cross_partition_path.empty()) {
    if (cross_labels_path.empty() || cross_partition_path.empty())
      throw UsageError("cross tabulation needs both --cross-labels and --cross-partition");
    const auto other_labels = gsom::load_labels(cross_labels_path, table);
    const auto other_partition = gsom::load_partition(cross_partition_path);
    const auto tab =
        gsom::cross_tab(class_labels, gsom::to_class_labels(other_labels, other_partition));
    gsom::atomic_write(global.out("cross_tab.csv"), cross_tab_csv(tab));
  }
  for (const auto& attr : slices) {
    const auto slice = gsom::slice_distribution(class_labels, table, attr);
    gsom::atomic_write(global.out("slice_" + safe_filename(attr) + ".csv"), slice_csv(slice));
  }
  std::cout << "wrote " << global.out("class_means.csv").string() << "\n";
}

void run_transitions(const GlobalOpts& global, const DataOpts& data,
                     const std::string& labels_path, const std::string& partition_path,
                     const std::string& matrix_path, const std::string& slice_spec,
                     int period_flag, double damping, double tol, int max_iters) {
  gsom::StationaryOptions opts;
  opts.damping = damping;
  opts.tol = tol;
  opts.max_iters = max_iters;

  if (!matrix_path.empty()) {
    // replay mode: stationary distribution of a stored/published matrix
    const auto tm = gsom::load_matrix(matrix_path, global.percent);
    const auto pi = gsom::stationary(tm, opts);
    gsom::atomic_write(global.out("limit.csv"), gsom::serialize_distribution(pi, "limit"));
    std::cout << "limit:";
    for (double v : pi) std::cout << " " << gsom::format_fixed(v, 4);
    std::cout << "\n";
    return;
  }

  if (data.path.empty() || labels_path.empty() || partition_path.empty())
    throw UsageError("transitions needs --data, --labels and --partition (or --matrix)");
  const auto table = load_table(data);
  const auto labels = gsom::load_labels(labels_path, table);
  const auto partition = gsom::load_partition(partition_path);
  const auto class_labels = gsom::to_class_labels(labels, partition);
  const int s_count = partition.class_count();

  std::vector<int> periods;
  if (period_flag != 0) {
    periods.push_back(period_flag);
  } else {
    std::set<int> tags;
    for (const auto& r : table.rows()) tags.insert(r.period);
    periods.assign(tags.begin(), tags.end());
  }

  std::pair<std::string, std::string> slice;
  if (!slice_spec.empty()) {
    const auto eq = slice_spec.find('=');
    if (eq == std::string::npos) throw UsageError("bad --slice (want attribute=value)");
    slice = {slice_spec.substr(0, eq), slice_spec.substr(eq + 1)};
  }

  for (int period : periods) {
    const std::string suffix = "_p" + std::to_string(period);
    auto trajs = gsom::build_trajectories(class_labels, table, s_count, period);
    if (!slice.first.empty()) {
      auto filtered = gsom::filter_trajectories(trajs, table, slice.first, slice.second);
      for (const auto& id : filtered.mixed_individuals)
        std::cerr << "note: individual " << id << " has mixed " << slice.first
                  << " values; excluded\n";
      trajs = std::move(filtered.kept);
      if (trajs.trajectories.empty()) {
        std::cout << "period " << period << ": slice " << slice.first << "=" << slice.second
                  << " matched no individuals\n";
        continue;
      }
    }
    if (trajs.transition_count() == 0) {
      std::cout << "period " << period << ": no transition pairs\n";
      continue;
    }
    const auto tm = gsom::transition_matrix(trajs);
    gsom::atomic_write(global.out("transitions" + suffix + "_counts.txt"),
                       gsom::serialize_matrix(tm, true));
    gsom::atomic_write(global.out("transitions" + suffix + "_percent.csv"),
                       percent_matrix_csv(tm));

    const auto empirical = gsom::empirical_distribution(trajs);
    std::optional<std::vector<double>> limit;
    try {
      limit = gsom::stationary(tm, opts);
    } catch (const gsom::Error& e) {
      std::cerr << "period " << period << ": " << e.what() << " (limit omitted)\n";
    }
    std::string dist = "class,empirical,limit\n";
    for (int s = 0; s < s_count; ++s) {
      dist += std::to_string(s + 1) + "," +
              gsom::format_sig(empirical[static_cast<std::size_t>(s)]) + ",";
      if (limit) dist += gsom::format_sig((*limit)[static_cast<std::size_t>(s)]);
      dist += "\n";
    }
    gsom::atomic_write(global.out("distributions" + suffix + ".csv"), dist);

    gsom::svg::CellGrid cells(
        static_cast<std::size_t>(s_count),
        std::vector<std::optional<double>>(static_cast<std::size_t>(s_count)));
    std::vector<std::string> row_labels;
    for (int i = 1; i <= s_count; ++i) {
      row_labels.push_back("from " + std::to_string(i));
      for (int j = 1; j <= s_count; ++j)
        cells[static_cast<std::size_t>(i) - 1][static_cast<std::size_t>(j) - 1] = tm.prob(i, j);
    }
    gsom::atomic_write(
        global.out("transitions" + suffix + ".svg"),
        gsom::svg::heatmap("transition probabilities, period " + std::to_string(period), cells,
                           row_labels, true));
    std::cout << "period " << period << ": " << trajs.transition_count() << " transitions, "
              << trajs.trajectories.size() << " individuals\n";
  }
}

void run_report(const GlobalOpts& global, const DataOpts& data, const std::string& codebook_path,
                const std::string& labels_path, const std::string& partition_path,
                const std::string& standardization_path, int content_cap) {
  const auto map = gsom::load_codebook(codebook_path);
  const std::size_t dim = map.dimension();
  std::vector<std::string> names = map.feature_names;
  if (names.empty())
    for (std::size_t d = 0; d < dim; ++d) names.push_back("f" + std::to_string(d + 1));

  // component planes: one grayscale heatmap per feature
  const auto layout = gsom::unit_layout(map.topology);
  std::vector<std::string> row_labels;
  for (std::size_t r = 0; r < layout.size(); ++r)
    row_labels.push_back("row " + std::to_string(r + 1));
  for (std::size_t d = 0; d < dim; ++d) {
    gsom::svg::CellGrid cells;
    for (const auto& row : layout) {
      std::vector<std::optional<double>> cell_row;
      for (int u : row) cell_row.push_back(map.codebook[static_cast<std::size_t>(u) - 1][d]);
      cells.push_back(std::move(cell_row));
    }
    gsom::atomic_write(global.out("plane_" + safe_filename(names[d]) + ".svg"),
                       gsom::svg::heatmap("codebook values: " + names[d], cells, row_labels));
  }

  const auto partition = partition_path.empty() ? gsom::components(map.topology)
                                                : gsom::load_partition(partition_path);
  // per-class codebook profiles: one polyline per unit over feature index
  for (int s = 1; s <= partition.class_count(); ++s) {
    std::vector<gsom::svg::Series> series;
    for (int u : partition.members(s)) {
      gsom::svg::Series line;
      line.label = "unit " + std::to_string(u);
      for (std::size_t d = 0; d < dim; ++d)
        line.points.emplace_back(static_cast<double>(d + 1),
                                 map.codebook[static_cast<std::size_t>(u) - 1][d]);
      series.push_back(std::move(line));
    }
    gsom::atomic_write(
        global.out("profile_class" + std::to_string(s) + ".svg"),
        gsom::svg::line_chart("codebook profiles, macro-class " + std::to_string(s),
                              "feature index", "standardized value", series));
  }

  // class contents: member rows overplotted, sampled above the cap
  if (!data.path.empty() && !labels_path.empty()) {
    auto table = load_table(data);
    if (!standardization_path.empty()) {
      const auto st = gsom::load_standardization(standardization_path, table.schema());
      std::vector<gsom::Observation> rows = table.rows();
      for (auto& r : rows) r.features = st.apply(r.features);
      table = gsom::SampleTable(table.schema(), std::move(rows));
    }
    const auto labels = gsom::load_labels(labels_path, table);
    std::map<int, std::vector<std::size_t>> rows_of_unit;
    for (std::size_t i = 0; i < labels.size(); ++i) rows_of_unit[labels[i]].push_back(i);
    gsom::Rng rng(global.seed);
    for (int s = 1; s <= partition.class_count(); ++s) {
      std::vector<gsom::svg::Series> series;
      for (int u : partition.members(s)) {
        auto it = rows_of_unit.find(u);
        if (it == rows_of_unit.end()) continue;
        std::vector<std::size_t> chosen = it->second;
        if (static_cast<int>(chosen.size()) > content_cap) {
          std::vector<std::size_t> sampled;
          for (std::size_t pick : rng.sample_without_replacement(
                   chosen.size(), static_cast<std::size_t>(content_cap)))
            sampled.push_back(chosen[pick]);
          chosen = std::move(sampled);
        }
        for (std::size_t row : chosen) {
          gsom::svg::Series line;
          line.width = 0.6;
          line.opacity = 0.25;
          line.color = "#1f77b4";
          for (std::size_t d = 0; d < dim; ++d)
            line.points.emplace_back(static_cast<double>(d + 1), table.rows()[row].features[d]);
          series.push_back(std::move(line));
        }
      }
      if (series.empty()) {
        std::cerr << "note: macro-class " << s << " has no member rows\n";
        continue;
      }
      gsom::atomic_write(
          global.out("content_class" + std::to_string(s) + ".svg"),
          gsom::svg::line_chart("class contents, macro-class " + std::to_string(s),
                                "feature index", "standardized value", series, false));
    }
  }
  std::cout << "wrote report svgs to " << global.out_dir << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"self-organizing maps over graph lattices"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "key-value config file; flags override it");

  GlobalOpts global;
  app.add_option("--out", global.out_dir, "output directory");
  app.add_option("--seed", global.seed, "random seed");
  app.add_flag("--percent", global.percent, "transition matrices are percent-valued");

  SynthOpts synth;
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic Gaussian panel");
  synth_cmd->add_option("--component", synth.components,
                        "mixture component 'm1:m2|s1:s2|w' (repeatable; default: bundled "
                        "5-cluster benchmark)");
  synth_cmd->add_option("--attribute", synth.attributes,
                        "per-individual attribute 'key=v1:w1,v2:w2' (repeatable)");
  synth_cmd->add_option("--feature-names", synth.feature_names, "comma list of feature names");
  synth_cmd->add_option("--individuals", synth.individuals, "number of individuals");
  synth_cmd->add_option("--times", synth.times, "observations per individual");
  synth_cmd->add_option("--periods", synth.periods, "number of period tags");
  synth_cmd->add_option("--switch-prob", synth.switch_prob,
                        "per-step probability of redrawing the component");

  DataOpts clean_data;
  auto* clean_cmd = app.add_subcommand("clean", "validate rows against schema bounds");
  add_data_options(clean_cmd, clean_data);

  DataOpts train_data;
  TrainOpts train_opts;
  auto* train_cmd = app.add_subcommand("train", "train a map and write all artifacts");
  add_data_options(train_cmd, train_data);
  add_train_options(train_cmd, train_opts);

  DataOpts compare_data;
  TrainOpts compare_opts;
  std::vector<std::string> compare_topologies;
  int compare_macro_classes = 5;
  auto* compare_cmd = app.add_subcommand("compare", "train several topologies on one dataset");
  add_data_options(compare_cmd, compare_data);
  add_train_options(compare_cmd, compare_opts);
  compare_cmd->add_option("--topologies", compare_topologies, "comma list of topology specs")
      ->delimiter(',')
      ->required();
  compare_cmd->add_option("--macro-classes", compare_macro_classes,
                          "macro-class count for connected maps (hac)");

  DataOpts curve_data;
  TrainOpts curve_opts;
  curve_opts.topology = "grid:5x8";
  auto* curve_cmd = app.add_subcommand("hac-curve", "macro error by class count for one map");
  add_data_options(curve_cmd, curve_data);
  add_train_options(curve_cmd, curve_opts);

  DataOpts assign_data;
  std::string assign_codebook, assign_standardization;
  auto* assign_cmd = app.add_subcommand("assign", "label rows with a stored codebook");
  add_data_options(assign_cmd, assign_data);
  assign_cmd->add_option("--codebook", assign_codebook, "codebook file")->required();
  assign_cmd->add_option("--standardization", assign_standardization,
                         "standardization file to apply before matching");

  DataOpts tables_data;
  std::string tables_labels, tables_partition, cross_labels, cross_partition;
  std::vector<std::string> table_slices;
  auto* tables_cmd = app.add_subcommand("tables", "class means, cross-tabs, slices");
  add_data_options(tables_cmd, tables_data);
  tables_cmd->add_option("--labels", tables_labels, "unit labels file")->required();
  tables_cmd->add_option("--partition", tables_partition, "partition file")->required();
  tables_cmd->add_option("--cross-labels", cross_labels, "second labels file to cross");
  tables_cmd->add_option("--cross-partition", cross_partition, "second partition file");
  tables_cmd->add_option("--slice", table_slices, "attribute to slice by (repeatable)");

  DataOpts trans_data;
  std::string trans_labels, trans_partition, trans_matrix, trans_slice;
  int trans_period = 0;
  double trans_damping = 1.0, trans_tol = 1e-10;
  int trans_max_iters = 100;
  auto* trans_cmd =
      app.add_subcommand("transitions", "per-period transition matrices and distributions");
  add_data_options(trans_cmd, trans_data, false);
  trans_cmd->add_option("--labels", trans_labels, "unit labels file");
  trans_cmd->add_option("--partition", trans_partition, "partition file");
  trans_cmd->add_option("--matrix", trans_matrix, "replay a stored matrix file");
  trans_cmd->add_option("--slice", trans_slice, "attribute=value filter on individuals");
  trans_cmd->add_option("--period", trans_period, "analyze one period tag only");
  trans_cmd->add_option("--damping", trans_damping, "damping for periodic chains, in (0,1]");
  trans_cmd->add_option("--tol", trans_tol, "stationary convergence tolerance");
  trans_cmd->add_option("--max-iters", trans_max_iters, "stationary iteration cap");

  DataOpts report_data;
  std::string report_codebook, report_labels, report_partition, report_standardization;
  int report_cap = 200;
  auto* report_cmd = app.add_subcommand("report", "svg bundle: planes, profiles, contents");
  add_data_options(report_cmd, report_data, false);
  report_cmd->add_option("--codebook", report_codebook, "codebook file")->required();
  report_cmd->add_option("--labels", report_labels, "unit labels file (enables content plots)");
  report_cmd->add_option("--partition", report_partition, "partition file");
  report_cmd->add_option("--standardization", report_standardization,
                         "standardization to apply to --data");
  report_cmd->add_option("--content-cap", report_cap, "max member lines per unit");

  synth_cmd->callback([&] { run_synth(global, synth); });
  clean_cmd->callback([&] { run_clean(global, clean_data); });
  train_cmd->callback([&] { run_train(global, train_data, train_opts); });
  compare_cmd->callback([&] {
    run_compare(global, compare_data, compare_opts, compare_topologies, compare_macro_classes);
  });
  curve_cmd->callback([&] { run_hac_curve(global, curve_data, curve_opts); });
  assign_cmd->callback(
      [&] { run_assign(global, assign_data, assign_codebook, assign_standardization); });
  tables_cmd->callback([&] {
    run_tables(global, tables_data, tables_labels, tables_partition, cross_labels,
               cross_partition, table_slices);
  });
  trans_cmd->callback([&] {
    run_transitions(global, trans_data, trans_labels, trans_partition, trans_matrix, trans_slice,
                    trans_period, trans_damping, trans_tol, trans_max_iters);
  });
  report_cmd->callback([&] {
    run_report(global, report_data, report_codebook, report_labels, report_partition,
               report_standardization, report_cap);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const UsageError& e) {
    std::cerr << "gsom: " << e.what() << "\n";
    return 2;
  } catch (const gsom::Error& e) {
    std::cerr << "gsom: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "gsom: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
