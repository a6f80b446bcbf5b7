#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "gsom/dataset.hpp"
#include "gsom/error.hpp"
#include "gsom/partition.hpp"
#include "gsom/som.hpp"

namespace gsom {

/// Macro-classes from the connected components of the lattice.
inline MacroPartition macro_from_components(const MapTopology& topo) { return components(topo); }

/// Macro-classes of a star lattice: one class per ray plus, listed last,
/// a singleton class for the center.
inline MacroPartition macro_from_star(const MapTopology& topo) {
  require(topo.kind() == LatticeKind::Star, "macro_from_star: not a star topology");
  const auto [n_rays, ray_length] = topo.lattice_params();
  std::vector<int> u2c(static_cast<std::size_t>(topo.unit_count()));
  u2c[0] = n_rays + 1;  // center
  for (int r = 1; r <= n_rays; ++r)
    for (int p = 0; p < ray_length; ++p) u2c[static_cast<std::size_t>((r - 1) * ray_length + p) + 1] = r;
  return MacroPartition(std::move(u2c), PartitionProvenance::StarRays);
}

struct MergeStep {
  int step = 0;       // 1-based
  int cluster_a = 0;  // smallest member unit of each merged cluster, a < b
  int cluster_b = 0;
  double cost = 0.0;  // Ward cost: increase in total within-cluster SS
};

struct MergeTrace {
  std::vector<MergeStep> steps;                         // K-1 merges
  std::vector<std::pair<int, double>> rqe_macro_curve;  // (S, ratio); filled by the caller
};

/// Ward agglomeration of the K code-vectors (unweighted, Euclidean).
/// Merge cost is the exact increase of within-cluster sum of squares,
/// (n_a n_b / (n_a + n_b)) ||c_a - c_b||^2 on cluster centroids. Ties go to
/// the lexicographically smallest (a, b) pair of cluster ids, where a
/// cluster id is its smallest member unit.
inline MergeTrace hac_merge_sequence(const CodebookMap& map) {
  const int k = map.unit_count();
  struct Cluster {
    int id;  // smallest member unit
    double n;
    std::vector<double > centroid;
  };
  std::vector<Cluster> active;
  active.reserve(static_cast<std::size_t>(k));
  for (int u = 1; u <= k; ++u)
    active.push_back({u, 1.0, map.codebook[static_cast<std::size_t>(u) - 1]});

  MergeTrace trace;
  for (int step = 1; step < k; ++step) {
    double best_cost = std::numeric_limits<double>::infinity();
    std::size_t best_i = 0, best_j = 0;
    for (std::size_t i = 0; i < active.size(); ++i) {
      for (std::size_t j = i + 1; j < active.size(); ++j) {
        const Cluster& a = active[i];
        const Cluster& b = active[j];
        const double cost =
            (a.n * b.n / (a.n + b.n)) * squared_distance(a.centroid, b.centroid);
        // active is ordered by cluster id, so (i, j) order is (a, b) order
        if (cost < best_cost) {
          best_cost = cost;
          best_i = i;
          best_j = j;
        }
      }
    }
    Cluster& a = active[best_i];
    Cluster& b = active[best_j];
    trace.steps.push_back({step, a.id, b.id, best_cost});
    const double n = a.n + b.n;
    for (std::size_t d = 0; d < a.centroid.size(); ++d)
      a.centroid[d] = (a.n * a.centroid[d] + b.n * b.centroid[d]) / n;
    a.n = n;
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(best_j));
  }
  return trace;
}

/// Partition of units after applying the first K - S merges of a trace.
/// Classes are numbered 1..S in order of their smallest member unit.
inline MacroPartition hac_partition_at(const MergeTrace& trace, int unit_count, int target_s) {
  require(target_s >= 1 && target_s <= unit_count, "hac_partition_at: S out of range");
  std::vector<int> rep(static_cast<std::size_t>(unit_count));
  for (int u = 1; u <= unit_count; ++u) rep[static_cast<std::size_t>(u) - 1] = u;
  auto find = [&](int u) {
    while (rep[static_cast<std::size_t>(u) - 1] != u) {
      rep[static_cast<std::size_t>(u) - 1] = rep[static_cast<std::size_t>(rep[static_cast<std::size_t>(u) - 1]) - 1];
      u = rep[static_cast<std::size_t>(u) - 1];
    }
    return u;
  };
  const int merges = unit_count - target_s;
  require(static_cast<int>(trace.steps.size()) >= merges, "hac_partition_at: trace too short");
  for (int m = 0; m < merges; ++m) {
    const int ra = find(trace.steps[static_cast<std::size_t>(m)].cluster_a);
    const int rb = find(trace.steps[static_cast<std::size_t>(m)].cluster_b);
    const int lo = std::min(ra, rb);
    rep[static_cast<std::size_t>(std::max(ra, rb)) - 1] = lo;
  }
  std::map<int, int> class_of_rep;
  for (int u = 1; u <= unit_count; ++u) class_of_rep.emplace(find(u), 0);
  int next = 0;
  for (auto& [r, c] : class_of_rep) c = ++next;
  std::vector<int> u2c(static_cast<std::size_t>(unit_count));
  for (int u = 1; u <= unit_count; ++u) u2c[static_cast<std::size_t>(u) - 1] = class_of_rep[find(u)];
  return MacroPartition(std::move(u2c), PartitionProvenance::Hac);
}

/// Hierarchical ascending classification of the code-vectors, cut at
/// target_s macro-classes.
inline std::pair<MacroPartition, MergeTrace> hac(const CodebookMap& map, int target_s) {
  require(target_s >= 1 && target_s <= map.unit_count(),
          "hac: target class count out of range 1.." + std::to_string(map.unit_count()));
  MergeTrace trace = hac_merge_sequence(map);
  MacroPartition partition = hac_partition_at(trace, map.unit_count(), target_s);
  return {std::move(partition), std::move(trace)};
}

/// Per-class, per-feature mean table with class sizes, a whole-sample
/// column, and the argmax class of every feature.
struct ClassMeansTable {
  std::vector<std::string> feature_names;
  std::vector<std::int64_t> class_sizes;          // S entries
  std::vector<std::vector<double>> class_means;   // S x D; NaN row for empty classes
  std::vector<double> sample_mean;                // D
  std::int64_t sample_size = 0;
  std::vector<int> max_class;                     // per feature: class with the largest mean
  std::vector<int> empty_classes;
};

/// Means by macro-class. Values come from `raw` (same rows, original units)
/// when provided, matching how profile tables are usually published;
/// otherwise from `table`.
inline ClassMeansTable class_means(const SampleTable& table, const std::vector<int>& labels,
                                   const MacroPartition& partition,
                                   const SampleTable* raw = nullptr) {
  require(labels.size() == table.size(), "class_means: labels/table size mismatch");
  const SampleTable& values = raw != nullptr ? *raw : table;
  require(values.size() == table.size(), "class_means: raw table size mismatch");
  require(values.feature_count() == table.feature_count(),
          "class_means: raw table dimension mismatch");
  const std::size_t dim = values.feature_count();
  const int s_count = partition.class_count();

  ClassMeansTable out;
  out.feature_names = values.schema().names();
  out.class_sizes.assign(static_cast<std::size_t>(s_count), 0);
  out.class_means.assign(static_cast<std::size_t>(s_count), std::vector<double>(dim, 0.0));
  out.sample_mean.assign(dim, 0.0);
  out.sample_size = static_cast<std::int64_t>(values.size());

  for (std::size_t i = 0; i < labels.size(); ++i) {
    require(labels[i] >= 1 && labels[i] <= partition.unit_count(),
            "class_means: label not covered by the partition");
    const std::size_t s = static_cast<std::size_t>(partition.class_of(labels[i])) - 1;
    const auto& x = values.rows()[i].features;
    ++out.class_sizes[s];
    for (std::size_t d = 0; d < dim; ++d) {
      out.class_means[s][d] += x[d];
      out.sample_mean[d] += x[d];
    }
  }
  for (std::size_t d = 0; d < dim; ++d) out.sample_mean[d] /= static_cast<double>(values.size());
  for (int s = 0; s < s_count; ++s) {
    if (out.class_sizes[static_cast<std::size_t>(s)] == 0) {
      out.empty_classes.push_back(s + 1);
      out.class_means[static_cast<std::size_t>(s)].assign(dim, std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    for (double& v : out.class_means[static_cast<std::size_t>(s)])
      v /= static_cast<double>(out.class_sizes[static_cast<std::size_t>(s)]);
  }
  out.max_class.assign(dim, 0);
  for (std::size_t d = 0; d < dim; ++d) {
    double best = -std::numeric_limits<double>::infinity();
    for (int s = 1; s <= s_count; ++s) {
      const double m = out.class_means[static_cast<std::size_t>(s) - 1][d];
      if (!std::isnan(m) && m > best) {
        best = m;
        out.max_class[d] = s;
      }
    }
  }
  return out;
}

/// Contingency table of two classifications of the same rows.
struct CrossTab {
  std::vector<std::vector<std::int64_t>> counts;  // rows: classes of A, cols: classes of B
  std::vector<std::int64_t> row_totals;
  std::vector<std::int64_t> col_totals;
  std::int64_t grand_total = 0;
};

inline CrossTab cross_tab(const std::vector<int>& labels_a, const std::vector<int>& labels_b) {
  require(labels_a.size() == labels_b.size(), "cross_tab: label lists differ in length");
  require(!labels_a.empty(), "cross_tab: no rows");
  int sa = 0, sb = 0;
  for (std::size_t i = 0; i < labels_a.size(); ++i) {
    require(labels_a[i] >= 1 && labels_b[i] >= 1, "cross_tab: class ids start at 1");
    sa = std::max(sa, labels_a[i]);
    sb = std::max(sb, labels_b[i]);
  }
  CrossTab tab;
  tab.counts.assign(static_cast<std::size_t>(sa), std::vector<std::int64_t>(static_cast<std::size_t>(sb), 0));
  tab.row_totals.assign(static_cast<std::size_t>(sa), 0);
  tab.col_totals.assign(static_cast<std::size_t>(sb), 0);
  for (std::size_t i = 0; i < labels_a.size(); ++i) {
    ++tab.counts[static_cast<std::size_t>(labels_a[i]) - 1][static_cast<std::size_t>(labels_b[i]) - 1];
    ++tab.row_totals[static_cast<std::size_t>(labels_a[i]) - 1];
    ++tab.col_totals[static_cast<std::size_t>(labels_b[i]) - 1];
    ++tab.grand_total;
  }
  return tab;
}

/// Class distribution in percent per attribute value; every row sums to 100.
struct SliceTable {
  std::string attribute;
  std::vector<std::string> values;                // sorted attribute values
  std::vector<std::int64_t> value_counts;
  std::vector<std::vector<double>> percent;       // values x classes
  int class_count = 0;
};

inline SliceTable slice_distribution(const std::vector<int>& class_labels,
                                     const SampleTable& table, const std::string& attribute) {
  require(class_labels.size() == table.size(), "slice_distribution: labels/table size mismatch");
  require(!table.empty(), "slice_distribution: empty table");
  int s_count = 0;
  for (int c : class_labels) {
    require(c >= 1, "slice_distribution: class ids start at 1");
    s_count = std::max(s_count, c);
  }
  std::map<std::string, std::vector<std::int64_t>> counts;
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto& attrs = table.rows()[i].attributes;
    auto it = attrs.find(attribute);
    require(it != attrs.end(), "slice_distribution: attribute '" + attribute + "' missing at row " +
                                   std::to_string(table.rows()[i].source_row));
    auto& row = counts[it->second];
    if (row.empty()) row.assign(static_cast<std::size_t>(s_count), 0);
    ++row[static_cast<std::size_t>(class_labels[i]) - 1];
  }
  SliceTable out;
  out.attribute = attribute;
  out.class_count = s_count;
  for (const auto& [value, row] : counts) {
    std::int64_t n = 0;
    for (std::int64_t c : row) n += c;
    out.values.push_back(value);
    out.value_counts.push_back(n);
    std::vector<double> pct(static_cast<std::size_t>(s_count));
    for (int s = 0; s < s_count; ++s)
      pct[static_cast<std::size_t>(s)] =
          100.0 * static_cast<double>(row[static_cast<std::size_t>(s)]) / static_cast<double>(n);
    out.percent.push_back(std::move(pct));
  }
  return out;
}

}  // namespace gsom
