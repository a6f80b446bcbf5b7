#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "gsom/dataset.hpp"
#include "gsom/error.hpp"
#include "gsom/partition.hpp"
#include "gsom/rng.hpp"

namespace gsom {

/// Unit labels mapped through a partition to macro-class labels.
inline std::vector<int> to_class_labels(const std::vector<int>& unit_labels,
                                        const MacroPartition& partition) {
  std::vector<int> out;
  out.reserve(unit_labels.size());
  for (int u : unit_labels) out.push_back(partition.class_of(u));
  return out;
}

struct TrajectoryStep {
  std::int64_t time = 0;
  int state = 0;  // macro-class, 1..S
};

struct Trajectory {
  std::string individual;
  std::vector<TrajectoryStep> steps;  // strictly increasing time
};

/// Per-individual macro-class sequences, sorted by individual id.
struct TrajectorySet {
  std::vector<Trajectory> trajectories;
  int state_count = 0;
  int period = 0;  // 0: all periods pooled

  std::int64_t observation_count() const {
    std::int64_t n = 0;
    for (const auto& t : trajectories) n += static_cast<std::int64_t>(t.steps.size());
    return n;
  }

  std::int64_t transition_count() const {
    std::int64_t n = 0;
    for (const auto& t : trajectories) n += static_cast<std::int64_t>(t.steps.size()) - 1;
    return n;
  }
};

/// Groups rows into per-individual time-ordered sequences. Consecutive
/// observation pairs count as one chain step regardless of the calendar
/// gap. period != 0 keeps only rows tagged with that period.
inline TrajectorySet build_trajectories(const std::vector<int>& class_labels,
                                        const SampleTable& table, int state_count,
                                        int period = 0) {
  require(class_labels.size() == table.size(), "build_trajectories: labels/table size mismatch");
  require(state_count >= 1, "build_trajectories: state count must be positive");
  std::map<std::string, std::vector<TrajectoryStep>> by_individual;
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto& row = table.rows()[i];
    if (period != 0 && row.period != period) continue;
    require(class_labels[i] >= 1 && class_labels[i] <= state_count,
            "build_trajectories: label " + std::to_string(class_labels[i]) + " outside 1.." +
                std::to_string(state_count));
    by_individual[row.individual].push_back({row.time, class_labels[i]});
  }
  TrajectorySet out;
  out.state_count = state_count;
  out.period = period;
  for (auto& [id, steps] : by_individual) {
    std::sort(steps.begin(), steps.end(),
              [](const TrajectoryStep& a, const TrajectoryStep& b) { return a.time < b.time; });
    for (std::size_t i = 1; i < steps.size(); ++i)
      require(steps[i].time != steps[i - 1].time,
              "build_trajectories: individual " + id + " has duplicate time " +
                  std::to_string(steps[i].time));
    out.trajectories.push_back({id, std::move(steps)});
  }
  return out;
}

/// Row-stochastic transition matrix with the raw counts behind it.
/// States that never occur as a source keep an all-zero probability row
/// and are listed by empty_states().
class TransitionMatrix {
 public:
  static TransitionMatrix from_counts(std::vector<std::vector<std::int64_t>> counts) {
    TransitionMatrix tm;
    tm.size_ = static_cast<int>(counts.size());
    require(tm.size_ >= 1, "TransitionMatrix: empty matrix");
    tm.counts_ = std::move(counts);
    tm.row_counts_.assign(static_cast<std::size_t>(tm.size_), 0);
    tm.probs_.assign(static_cast<std::size_t>(tm.size_),
                     std::vector<double>(static_cast<std::size_t>(tm.size_), 0.0));
    for (int i = 0; i < tm.size_; ++i) {
      require(static_cast<int>(tm.counts_[static_cast<std::size_t>(i)].size()) == tm.size_,
              "TransitionMatrix: ragged counts");
      std::int64_t total = 0;
      for (std::int64_t c : tm.counts_[static_cast<std::size_t>(i)]) {
        require(c >= 0, "TransitionMatrix: negative count");
        total += c;
      }
      tm.row_counts_[static_cast<std::size_t>(i)] = total;
      if (total > 0)
        for (int j = 0; j < tm.size_; ++j)
          tm.probs_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
              static_cast<double>(tm.counts_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]) /
              static_cast<double>(total);
    }
    return tm;
  }

  /// Probabilities given directly. With renormalize, each positive row is
  /// scaled to sum to 1 (accepts percent-valued rows and rounding drift);
  /// without it, row sums must already lie within 1e-6 of 1.
  static TransitionMatrix from_probabilities(std::vector<std::vector<double>> probs,
                                             bool renormalize = false) {
    TransitionMatrix tm;
    tm.size_ = static_cast<int>(probs.size());
    require(tm.size_ >= 1, "TransitionMatrix: empty matrix");
    tm.probs_ = std::move(probs);
    tm.counts_.assign(static_cast<std::size_t>(tm.size_),
                      std::vector<std::int64_t>(static_cast<std::size_t>(tm.size_), 0));
    tm.row_counts_.assign(static_cast<std::size_t>(tm.size_), 0);
    for (int i = 0; i < tm.size_; ++i) {
      auto& row = tm.probs_[static_cast<std::size_t>(i)];
      require(static_cast<int>(row.size()) == tm.size_, "TransitionMatrix: ragged matrix");
      double sum = 0.0;
      for (double p : row) {
        require(p >= 0.0 && std::isfinite(p), "TransitionMatrix: invalid probability");
        sum += p;
      }
      if (sum == 0.0) continue;  // empty source state
      if (!renormalize)
        require(std::abs(sum - 1.0) <= 1e-6,
                "TransitionMatrix: row " + std::to_string(i + 1) + " sums to " +
                    std::to_string(sum) + "; pass the percent/renormalize option if intended");
      for (double& p : row) p /= sum;
      tm.row_counts_[static_cast<std::size_t>(i)] = 1;  // marks the row as observed
    }
    return tm;
  }

  int state_count() const { return size_; }

  double prob(int i, int j) const {
    check(i);
    check(j);
    return probs_[static_cast<std::size_t>(i) - 1][static_cast<std::size_t>(j) - 1];
  }

  std::int64_t count(int i, int j) const {
    check(i);
    check(j);
    return counts_[static_cast<std::size_t>(i) - 1][static_cast<std::size_t>(j) - 1];
  }

  std::int64_t row_count(int i) const {
    check(i);
    return row_counts_[static_cast<std::size_t>(i) - 1];
  }

  const std::vector<std::vector<double>>& probabilities() const { return probs_; }
  const std::vector<std::vector<std::int64_t>>& counts() const { return counts_; }

  /// States never observed as a source (1-indexed).
  std::vector<int> empty_states() const {
    std::vector<int> out;
    for (int i = 0; i < size_; ++i)
      if (row_counts_[static_cast<std::size_t>(i)] == 0) out.push_back(i + 1);
    return out;
  }

 private:
  void check(int i) const {
    require(i >= 1 && i <= size_, "TransitionMatrix: state index out of range");
  }

  int size_ = 0;
  std::vector<std::vector<std::int64_t>> counts_;
  std::vector<std::vector<double>> probs_;
  std::vector<std::int64_t> row_counts_;
};

/// Empirical transition frequencies pooled over individuals and times.
inline TransitionMatrix transition_matrix(const TrajectorySet& trajs) {
  require(trajs.state_count >= 1, "transition_matrix: no states");
  std::vector<std::vector<std::int64_t>> counts(
      static_cast<std::size_t>(trajs.state_count),
      std::vector<std::int64_t>(static_cast<std::size_t>(trajs.state_count), 0));
  std::int64_t pairs = 0;
  for (const auto& t : trajs.trajectories)
    for (std::size_t i = 1; i < t.steps.size(); ++i) {
      ++counts[static_cast<std::size_t>(t.steps[i - 1].state) - 1]
              [static_cast<std::size_t>(t.steps[i].state) - 1];
      ++pairs;
    }
  require(pairs > 0, "transition_matrix: no transition pairs");
  return TransitionMatrix::from_counts(std::move(counts));
}

struct StationaryOptions {
  double tol = 1e-10;
  int max_iters = 100;   // matrix squarings
  double damping = 1.0;  // lambda in (0,1]: iterate lambda*P + (1-lambda)*I
};

/// Limit distribution of an irreducible chain, by repeated squaring of the
/// transition matrix until all rows agree within tol. States never observed
/// as a source are excluded beforehand and receive probability 0; damping
/// (which preserves the stationary vector) unsticks periodic chains.
inline std::vector<double> stationary(const TransitionMatrix& tm,
                                      const StationaryOptions& options = {}) {
  const int s = tm.state_count();
  require(options.tol > 0.0, "stationary: tol must be positive");
  require(options.max_iters >= 1, "stationary: max_iters must be positive");
  require(options.damping > 0.0 && options.damping <= 1.0, "stationary: damping must lie in (0,1]");

  // Restrict to observed source states; transitions must not leak into the
  // excluded ones.
  std::vector<int> active;
  for (int i = 1; i <= s; ++i)
    if (tm.row_count(i) > 0) active.push_back(i);
  require(!active.empty(), "stationary: every state lacks outgoing transitions");
  for (int i : active)
    for (int j = 1; j <= s; ++j)
      if (tm.prob(i, j) > 0.0 && tm.row_count(j) == 0)
        throw Error("stationary: transitions enter state " + std::to_string(j) +
                    " which has no outgoing data");

  const int n = static_cast<int>(active.size());
  std::vector<std::vector<double>> p(static_cast<std::size_t>(n),
                                     std::vector<double>(static_cast<std::size_t>(n), 0.0));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      p[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = tm.prob(active[static_cast<std::size_t>(a)], active[static_cast<std::size_t>(b)]);

  // Structural irreducibility: strong connectivity of the positive-entry
  // digraph (forward and backward reachability from state active[0]).
  auto reach = [&](bool forward) {
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::vector<int> queue = {0};
    seen[0] = 1;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const int u = queue[head];
      for (int v = 0; v < n; ++v) {
        const double edge = forward ? p[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)]
                                    : p[static_cast<std::size_t>(v)][static_cast<std::size_t>(u)];
        if (edge > 0.0 && !seen[static_cast<std::size_t>(v)]) {
          seen[static_cast<std::size_t>(v)] = 1;
          queue.push_back(v);
        }
      }
    }
    return seen;
  };
  const auto fwd = reach(true);
  const auto bwd = reach(false);
  std::string fwd_miss, bwd_miss;
  for (int v = 0; v < n; ++v) {
    if (!fwd[static_cast<std::size_t>(v)])
      fwd_miss += (fwd_miss.empty() ? "" : ",") + std::to_string(active[static_cast<std::size_t>(v)]);
    if (!bwd[static_cast<std::size_t>(v)])
      bwd_miss += (bwd_miss.empty() ? "" : ",") + std::to_string(active[static_cast<std::size_t>(v)]);
  }
  if (!fwd_miss.empty() || !bwd_miss.empty()) {
    std::string msg = "stationary: chain is reducible;";
    if (!fwd_miss.empty())
      msg += " states {" + fwd_miss + "} unreachable from state " + std::to_string(active[0]) + ";";
    if (!bwd_miss.empty())
      msg += " states {" + bwd_miss + "} cannot reach state " + std::to_string(active[0]) + ";";
    throw Error(msg);
  }

  if (options.damping < 1.0) {
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        double& v = p[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
        v = options.damping * v + (a == b ? 1.0 - options.damping : 0.0);
      }
  }

  auto row_spread = [&](const std::vector<std::vector<double>>& m) {
    double spread = 0.0;
    for (int b = 0; b < n; ++b) {
      double lo = m[0][static_cast<std::size_t>(b)], hi = lo;
      for (int a = 1; a < n; ++a) {
        lo = std::min(lo, m[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]);
        hi = std::max(hi, m[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]);
      }
      spread = std::max(spread, hi - lo);
    }
    return spread;
  };

  int iter = 0;
  while (row_spread(p) >= options.tol) {
    if (++iter > options.max_iters)
      throw Error("stationary: no convergence after " + std::to_string(options.max_iters) +
                  " squarings (periodic chain?); retry with damping < 1");
    std::vector<std::vector<double>> sq(static_cast<std::size_t>(n),
                                        std::vector<double>(static_cast<std::size_t>(n), 0.0));
    for (int a = 0; a < n; ++a)
      for (int k = 0; k < n; ++k) {
        const double pak = p[static_cast<std::size_t>(a)][static_cast<std::size_t>(k)];
        if (pak == 0.0) continue;
        for (int b = 0; b < n; ++b)
          sq[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] +=
              pak * p[static_cast<std::size_t>(k)][static_cast<std::size_t>(b)];
      }
    p = std::move(sq);
  }

  std::vector<double> pi_active(static_cast<std::size_t>(n), 0.0);
  for (int b = 0; b < n; ++b) {
    double mean = 0.0;
    for (int a = 0; a < n; ++a) mean += p[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
    pi_active[static_cast<std::size_t>(b)] = mean / static_cast<double>(n);
  }
  double total = 0.0;
  for (double v : pi_active) total += v;
  for (double& v : pi_active) v /= total;

  std::vector<double> pi(static_cast<std::size_t>(s), 0.0);
  for (int a = 0; a < n; ++a) pi[static_cast<std::size_t>(active[static_cast<std::size_t>(a)]) - 1] = pi_active[static_cast<std::size_t>(a)];
  return pi;
}

/// Fraction of all (individual, time) observations in each state.
inline std::vector<double> empirical_distribution(const TrajectorySet& trajs) {
  require(trajs.state_count >= 1, "empirical_distribution: no states");
  std::vector<double> dist(static_cast<std::size_t>(trajs.state_count), 0.0);
  std::int64_t total = 0;
  for (const auto& t : trajs.trajectories)
    for (const auto& step : t.steps) {
      ++dist[static_cast<std::size_t>(step.state) - 1];
      ++total;
    }
  require(total > 0, "empirical_distribution: no observations");
  for (double& v : dist) v /= static_cast<double>(total);
  return dist;
}

struct FilteredTrajectories {
  TrajectorySet kept;
  std::vector<std::string> mixed_individuals;  // excluded: attribute varies within individual
};

/// Keeps individuals whose table rows all carry attribute == value.
/// Individuals with a varying attribute are excluded and reported.
inline FilteredTrajectories filter_trajectories(const TrajectorySet& trajs,
                                                const SampleTable& table,
                                                const std::string& attribute,
                                                const std::string& value) {
  std::map<std::string, std::set<std::string>> values_of;
  bool attribute_seen = false;
  for (const auto& row : table.rows()) {
    auto it = row.attributes.find(attribute);
    if (it != row.attributes.end()) {
      attribute_seen = true;
      values_of[row.individual].insert(it->second);
    }
  }
  require(attribute_seen, "filter_trajectories: unknown attribute '" + attribute + "'");

  FilteredTrajectories out;
  out.kept.state_count = trajs.state_count;
  out.kept.period = trajs.period;
  for (const auto& t : trajs.trajectories) {
    auto it = values_of.find(t.individual);
    require(it != values_of.end() && !it->second.empty(),
            "filter_trajectories: attribute '" + attribute + "' missing for individual " +
                t.individual);
    if (it->second.size() > 1) {
      out.mixed_individuals.push_back(t.individual);
      continue;
    }
    if (*it->second.begin() == value) out.kept.trajectories.push_back(t);
  }
  return out;
}

/// Simulates one long trajectory of a known chain (times 1..steps).
inline TrajectorySet simulate_chain(const TransitionMatrix& tm, std::int64_t steps,
                                    std::uint64_t seed, int start_state = 1) {
  const int s = tm.state_count();
  require(steps >= 1, "simulate_chain: steps must be positive");
  require(start_state >= 1 && start_state <= s, "simulate_chain: start state out of range");
  require(tm.empty_states().empty(), "simulate_chain: matrix has states without outgoing mass");
  Rng rng(seed);
  TrajectorySet out;
  out.state_count = s;
  Trajectory traj;
  traj.individual = "sim";
  int state = start_state;
  traj.steps.push_back({1, state});
  for (std::int64_t t = 2; t <= steps; ++t) {
    const double u = rng.next_double();
    double acc = 0.0;
    int next = s;
    for (int j = 1; j <= s; ++j) {
      acc += tm.prob(state, j);
      if (u < acc) {
        next = j;
        break;
      }
    }
    state = next;
    traj.steps.push_back({t, state});
  }
  out.trajectories.push_back(std::move(traj));
  return out;
}

}  // namespace gsom
