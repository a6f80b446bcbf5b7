#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gsom/csv.hpp"
#include "gsom/dataset.hpp"
#include "gsom/error.hpp"
#include "gsom/partition.hpp"
#include "gsom/som.hpp"

namespace gsom {

/// A sum of squares, the total sum of squares, and their ratio.
struct SumRatio {
  double sum = 0.0;
  double total = 0.0;
  double ratio = 0.0;
};

struct MacroSumRatio {
  double sum = 0.0;
  double total = 0.0;
  double ratio = 0.0;
  std::vector<int> empty_classes;  // macro-classes with no member rows
};

/// Total sum of squares around the table mean.
inline double total_sum_of_squares(const SampleTable& table) {
  require(!table.empty(), "total_sum_of_squares: empty table");
  const std::vector<double> mean = table.feature_means();
  double total = 0.0;
  for (const auto& r : table.rows()) total += squared_distance(r.features, mean);
  require(total > 0.0, "total_sum_of_squares: all rows identical");
  return total;
}

/// Relative quantization error: within sum of squares against BMU
/// code-vectors over the total sum of squares.
inline SumRatio rqe(const CodebookMap& map, const SampleTable& table) {
  require(map.dimension() == table.feature_count(), "rqe: dimension mismatch");
  const double total = total_sum_of_squares(table);
  double within = 0.0;
  for (const auto& r : table.rows()) {
    const int c = bmu(map, r.features);
    within += squared_distance(r.features, map.codebook[static_cast<std::size_t>(c) - 1]);
  }
  return {within, total, within / total};
}

/// Relative extended quantization error: each sample scored against the
/// lattice neighbors of its BMU (mean over the neighbor set). A sample
/// whose BMU has no neighbors contributes its plain quantization term.
inline SumRatio rqe_ext(const CodebookMap& map, const SampleTable& table) {
  require(map.dimension() == table.feature_count(), "rqe_ext: dimension mismatch");
  const double total = total_sum_of_squares(table);
  double extended = 0.0;
  for (const auto& r : table.rows()) {
    const int c = bmu(map, r.features);
    const auto& neighbors = map.topology.neighbors(c);
    if (neighbors.empty()) {
      extended += squared_distance(r.features, map.codebook[static_cast<std::size_t>(c) - 1]);
      continue;
    }
    double term = 0.0;
    for (int k : neighbors)
      term += squared_distance(r.features, map.codebook[static_cast<std::size_t>(k) - 1]);
    extended += term / static_cast<double>(neighbors.size());
  }
  return {extended, total, extended / total};
}

/// Relative quantization error at macro-class level: rows scored against
/// the empirical mean of their macro-class members. Both passes accumulate
/// in row order, which does not depend on how classes are numbered, so a
/// coarsening that leaves every membership set unchanged reproduces the sum
/// bit for bit. Empty macro-classes contribute nothing and are reported.
inline MacroSumRatio rqe_macro(const SampleTable& table, const std::vector<int>& labels,
                               const MacroPartition& partition) {
  require(labels.size() == table.size(), "rqe_macro: labels/table size mismatch");
  const double total = total_sum_of_squares(table);
  const std::size_t dim = table.feature_count();
  const int s_count = partition.class_count();

  std::vector<int> row_class(labels.size());
  std::vector<std::vector<double>> class_mean(static_cast<std::size_t>(s_count),
                                              std::vector<double>(dim, 0.0));
  std::vector<std::int64_t> class_n(static_cast<std::size_t>(s_count), 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    require(labels[i] >= 1 && labels[i] <= partition.unit_count(),
            "rqe_macro: label " + std::to_string(labels[i]) + " not covered by the partition");
    const int s = partition.class_of(labels[i]);
    row_class[i] = s;
    auto& m = class_mean[static_cast<std::size_t>(s) - 1];
    const auto& x = table.rows()[i].features;
    for (std::size_t d = 0; d < dim; ++d) m[d] += x[d];
    ++class_n[static_cast<std::size_t>(s) - 1];
  }

  MacroSumRatio out;
  out.total = total;
  for (int s = 1; s <= s_count; ++s) {
    const std::int64_t n = class_n[static_cast<std::size_t>(s) - 1];
    if (n == 0) {
      out.empty_classes.push_back(s);
      continue;
    }
    for (double& v : class_mean[static_cast<std::size_t>(s) - 1]) v /= static_cast<double>(n);
  }
  for (std::size_t i = 0; i < labels.size(); ++i)
    out.sum += squared_distance(table.rows()[i].features,
                                class_mean[static_cast<std::size_t>(row_class[i]) - 1]);
  out.ratio = out.sum / total;
  return out;
}

/// All indicators for one trained map, macro level optional.
struct QualityReport {
  double sc_within = 0.0;
  double sc_extended = 0.0;
  std::optional<double> sc_macro;
  double sc_total = 0.0;
  double rqe = 0.0;
  double rqe_ext = 0.0;
  std::optional<double> rqe_macro;
};

inline QualityReport quality_report(const CodebookMap& map, const SampleTable& table,
                                    const std::vector<int>* labels = nullptr,
                                    const MacroPartition* partition = nullptr) {
  QualityReport report;
  const SumRatio within = rqe(map, table);
  const SumRatio extended = rqe_ext(map, table);
  report.sc_within = within.sum;
  report.sc_extended = extended.sum;
  report.sc_total = within.total;
  report.rqe = within.ratio;
  report.rqe_ext = extended.ratio;
  if (labels != nullptr && partition != nullptr) {
    const MacroSumRatio macro = rqe_macro(table, *labels, *partition);
    report.sc_macro = macro.sum;
    report.rqe_macro = macro.ratio;
  }
  return report;
}

inline std::string serialize_quality(const QualityReport& report) {
  std::string out;
  out += "sc_within=" + format_sig(report.sc_within) + "\n";
  out += "sc_extended=" + format_sig(report.sc_extended) + "\n";
  if (report.sc_macro) out += "sc_macro=" + format_sig(*report.sc_macro) + "\n";
  out += "sc_total=" + format_sig(report.sc_total) + "\n";
  out += "rqe=" + format_sig(report.rqe) + "\n";
  out += "rqe_ext=" + format_sig(report.rqe_ext) + "\n";
  if (report.rqe_macro) out += "rqe_macro=" + format_sig(*report.rqe_macro) + "\n";
  return out;
}

}  // namespace gsom
