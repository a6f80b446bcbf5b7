#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gsom/dataset.hpp"
#include "gsom/error.hpp"
#include "gsom/rng.hpp"
#include "gsom/topology.hpp"

namespace gsom {

enum class Kernel { Gaussian, Indicator };

inline std::string to_string(Kernel k) {
  return k == Kernel::Gaussian ? "gaussian" : "indicator";
}

/// Neighborhood weight h(d, sigma) in [0, 1]. Unreachable units (other
/// components) always get 0, so cooperation never crosses components.
/// Indicator uses the strict form 1_(d < sigma).
inline double neighborhood_weight(Kernel kernel, int d, double sigma) {
  require(sigma > 0.0, "neighborhood_weight: sigma must be positive");
  if (d == kUnreachable) return 0.0;
  if (kernel == Kernel::Indicator) return d < sigma ? 1.0 : 0.0;
  const double z = static_cast<double>(d) / sigma;
  return std::exp(-0.5 * z * z);
}

/// Online training schedule. sigma_start <= 0 requests the default radius,
/// half the diameter of the largest component, resolved at train time.
struct TrainingConfig {
  int epochs = 20;
  double alpha_start = 0.5;
  double alpha_end = 0.01;
  double sigma_start = 0.0;  // <= 0: auto
  double sigma_end = 0.5;
  Kernel kernel = Kernel::Gaussian;
  std::uint64_t seed = 0;

  TrainingConfig resolved(const MapTopology& topo) const {
    TrainingConfig c = *this;
    if (c.sigma_start <= 0.0)
      c.sigma_start = std::max(topo.largest_component_diameter() / 2.0, c.sigma_end);
    c.validate();
    return c;
  }

  void validate() const {
    require(epochs >= 1, "TrainingConfig: epochs must be positive");
    require(alpha_end > 0.0 && alpha_start <= 1.0 && alpha_end <= alpha_start,
            "TrainingConfig: need 0 < alpha_end <= alpha_start <= 1");
    require(sigma_end > 0.0 && sigma_end <= sigma_start,
            "TrainingConfig: need 0 < sigma_end <= sigma_start");
  }
};

/// K code-vectors bound to a lattice, plus the configuration that produced
/// them. Immutable in use; bmu/assign are pure reads.
struct CodebookMap {
  MapTopology topology;
  std::vector<std::vector<double>> codebook;  // K x D
  TrainingConfig config;
  std::vector<std::string> feature_names;

  CodebookMap(MapTopology topo, std::vector<std::vector<double>> code, TrainingConfig cfg,
              std::vector<std::string> names)
      : topology(std::move(topo)),
        codebook(std::move(code)),
        config(cfg),
        feature_names(std::move(names)) {
    require(static_cast<int>(codebook.size()) == topology.unit_count(),
            "CodebookMap: codebook size differs from unit count");
    require(!codebook.empty() && !codebook.front().empty(), "CodebookMap: empty codebook");
    for (const auto& m : codebook)
      require(m.size() == codebook.front().size(), "CodebookMap: ragged codebook");
    require(feature_names.empty() || feature_names.size() == codebook.front().size(),
            "CodebookMap: feature_names dimension mismatch");
  }

  int unit_count() const { return topology.unit_count(); }
  std::size_t dimension() const { return codebook.front().size(); }
};

inline double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) {
    const double diff = a[d] - b[d];
    s += diff * diff;
  }
  return s;
}

/// Best matching unit: argmin over units of ||x - m_i||^2, ties to the
/// smallest unit id. Returns a 1-indexed unit.
inline int bmu(const CodebookMap& map, const std::vector<double>& x) {
  require(x.size() == map.dimension(), "bmu: sample dimension mismatch");
  int best = 1;
  double best_d = squared_distance(x, map.codebook[0]);
  for (int i = 2; i <= map.unit_count(); ++i) {
    const double d = squared_distance(x, map.codebook[static_cast<std::size_t>(i) - 1]);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

namespace detail {

/// One online step applied in place: find the BMU of x, then move every
/// unit by alpha * h(d_ci, sigma) * (x - m_i). Units with zero step are
/// left untouched bit-exactly.
inline void update_in_place(std::vector<std::vector<double>>& codebook, const MapTopology& topo,
                            const CodebookMap& view, const std::vector<double>& x, double alpha,
                            double sigma, Kernel kernel) {
  const int c = bmu(view, x);
  for (int i = 1; i <= topo.unit_count(); ++i) {
    const double h = neighborhood_weight(kernel, topo.distance(c, i), sigma);
    const double step = alpha * h;
    if (step == 0.0) continue;
    auto& m = codebook[static_cast<std::size_t>(i) - 1];
    for (std::size_t d = 0; d < m.size(); ++d) m[d] += step * (x[d] - m[d]);
  }
}

}  // namespace detail

/// Pure one-step update (competitive + cooperative) returning the moved map.
inline CodebookMap update_step(const CodebookMap& map, const std::vector<double>& x, double alpha,
                               double sigma) {
  require(alpha > 0.0 && alpha <= 1.0, "update_step: alpha must lie in (0,1]");
  require(x.size() == map.dimension(), "update_step: sample dimension mismatch");
  CodebookMap out = map;
  detail::update_in_place(out.codebook, out.topology, map, x, alpha, sigma, map.config.kernel);
  return out;
}

/// Draws K initial code-vectors from the table rows: distinct rows when
/// N >= K, uniform with replacement otherwise.
inline std::vector<std::vector<double>> sample_initial_codebook(const SampleTable& table,
                                                                int unit_count, Rng& rng) {
  require(!table.empty(), "sample_initial_codebook: empty table");
  const std::size_t n = table.size();
  const std::size_t k = static_cast<std::size_t>(unit_count);
  std::vector<std::vector<double>> code;
  code.reserve(k);
  if (n >= k) {
    for (std::size_t idx : rng.sample_without_replacement(n, k))
      code.push_back(table.rows()[idx].features);
  } else {
    for (std::size_t i = 0; i < k; ++i)
      code.push_back(table.rows()[static_cast<std::size_t>(rng.below(n))].features);
  }
  return code;
}

namespace detail {

inline CodebookMap train_loop(const SampleTable& table, const MapTopology& topo,
                              const TrainingConfig& cfg,
                              std::vector<std::vector<double>> initial_codebook, Rng& rng) {
  CodebookMap map(topo, std::move(initial_codebook), cfg, table.schema().names());
  require(map.dimension() == table.feature_count(), "train: codebook/table dimension mismatch");
  const std::size_t n = table.size();
  const std::size_t total_steps = static_cast<std::size_t>(cfg.epochs) * n;
  std::size_t step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const std::vector<std::size_t> order = rng.permutation(n);
    for (std::size_t pos = 0; pos < n; ++pos, ++step) {
      const double frac =
          total_steps > 1 ? static_cast<double>(step) / static_cast<double>(total_steps - 1) : 0.0;
      const double alpha = cfg.alpha_start + (cfg.alpha_end - cfg.alpha_start) * frac;
      const double sigma = cfg.sigma_start + (cfg.sigma_end - cfg.sigma_start) * frac;
      const auto& x = table.rows()[order[pos]].features;
      detail::update_in_place(map.codebook, map.topology, map, x, alpha, sigma, cfg.kernel);
    }
  }
  return map;
}

}  // namespace detail

/// Online SOM training with an explicit initial codebook. Presents every
/// sample once per epoch in a fresh seeded shuffle; alpha and sigma decay
/// linearly in the global step index. Deterministic given inputs.
inline CodebookMap train(const SampleTable& table, const MapTopology& topo,
                         const TrainingConfig& config,
                         std::vector<std::vector<double>> initial_codebook) {
  require(!table.empty(), "train: empty table");
  const TrainingConfig cfg = config.resolved(topo);
  Rng rng(cfg.seed);
  return detail::train_loop(table, topo, cfg, std::move(initial_codebook), rng);
}

/// Online SOM training; the initial codebook is sampled from the table
/// (seeded, same stream as the epoch shuffles). The table should be
/// standardized by the caller.
inline CodebookMap train(const SampleTable& table, const MapTopology& topo,
                         const TrainingConfig& config) {
  require(!table.empty(), "train: empty table");
  const TrainingConfig cfg = config.resolved(topo);
  Rng rng(cfg.seed);
  auto initial = sample_initial_codebook(table, topo.unit_count(), rng);
  return detail::train_loop(table, topo, cfg, std::move(initial), rng);
}

/// Per-row BMU labels, in table row order.
inline std::vector<int> assign(const CodebookMap& map, const SampleTable& table) {
  std::vector<int> labels;
  labels.reserve(table.size());
  for (const auto& row : table.rows()) labels.push_back(bmu(map, row.features));
  return labels;
}

}  // namespace gsom
