// Acceptance suite: runs every release criterion at its stated tolerance
// and prints one pass/fail line per criterion. Exit code is the number of
// failed criteria. The gsom binary path is taken from argv[1] (or the
// GSOM_CLI environment variable) for the determinism criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "gsom/gsom.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

bool close_rel(double a, double b, double rel) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
  return std::abs(a - b) <= rel * scale;
}

gsom::SyntheticPanelConfig benchmark_mixture(int individuals, int times) {
  gsom::SyntheticPanelConfig config;
  config.components = {
      {{0.0, 0.0}, {1.0, 1.0}, 1.0},  {{10.0, 0.0}, {1.0, 1.0}, 1.0},
      {{0.0, 10.0}, {1.0, 1.0}, 1.0}, {{10.0, 10.0}, {1.0, 1.0}, 1.0},
      {{5.0, 5.0}, {1.0, 1.0}, 1.0},
  };
  config.individuals = individuals;
  config.times = times;
  return config;
}

// 1. shortest-path distances on the three published lattice examples
Outcome criterion_distances() {
  const auto start = std::chrono::steady_clock::now();
  const auto grid = gsom::MapTopology::grid(5, 8);
  const auto strings = gsom::MapTopology::strings(5, 8);
  const auto star = gsom::MapTopology::star(5, 8);
  const bool values_ok = grid.distance(13, 21) == 1 && grid.distance(26, 37) == 4 &&
                         strings.distance(13, 21) == gsom::kUnreachable &&
                         strings.distance(26, 31) == 5 && star.distance(3, 20) == 5;
  const double secs = seconds_since(start);
  return {values_ok && secs < 1.0,
          "grid d(13,21)=" + std::to_string(grid.distance(13, 21)) +
              " d(26,37)=" + std::to_string(grid.distance(26, 37)) + ", strings d(13,21)=" +
              (strings.distance(13, 21) == gsom::kUnreachable ? "inf" : "finite") +
              " d(26,31)=" + std::to_string(strings.distance(26, 31)) +
              ", star d(3,20)=" + std::to_string(star.distance(3, 20)) + "; " + fmt(secs) + " s"};
}

// 2. stationary distributions of the two published five-state matrices
Outcome criterion_limit_distributions() {
  const auto start = std::chrono::steady_clock::now();
  std::string detail;
  bool pass = true;
  const std::vector<std::pair<std::vector<std::vector<double>>, std::vector<double>>> cases = {
      {fixtures::period1_percent(), fixtures::period1_limit()},
      {fixtures::period2_percent(), fixtures::period2_limit()},
  };
  for (std::size_t p = 0; p < cases.size(); ++p) {
    const auto tm = gsom::TransitionMatrix::from_probabilities(cases[p].first, true);
    const auto pi = gsom::stationary(tm);
    double worst = 0.0;
    for (std::size_t s = 0; s < pi.size(); ++s)
      worst = std::max(worst, std::abs(pi[s] - cases[p].second[s]));
    const bool ok = worst <= 0.02;
    pass = pass && ok;
    detail += "period " + std::to_string(p + 1) + ": computed (";
    for (std::size_t s = 0; s < pi.size(); ++s) detail += (s ? "," : "") + fmt(pi[s]);
    detail += ") vs stated (";
    for (std::size_t s = 0; s < pi.size(); ++s) detail += (s ? "," : "") + fmt(cases[p].second[s]);
    detail += ") max|diff|=" + fmt(worst) + (ok ? " ok" : " EXCEEDS 0.02") + "; ";
  }
  const double secs = seconds_since(start);
  return {pass && secs < 1.0, detail + fmt(secs) + " s"};
}

// 3. indicator sums equal independent double-loop oracles on 50 fixtures
Outcome criterion_metric_oracles() {
  gsom::Rng rng(20260810);
  int checked = 0;
  for (int trial = 0; trial < 50; ++trial) {
    gsom::MapTopology topo = gsom::MapTopology::grid(1, 1);
    switch (trial % 4) {
      case 0:
        topo = gsom::MapTopology::grid(2 + static_cast<int>(rng.below(4)),
                                       2 + static_cast<int>(rng.below(7)));
        break;
      case 1:
        topo = gsom::MapTopology::strings(1 + static_cast<int>(rng.below(6)),
                                          1 + static_cast<int>(rng.below(6)));
        break;
      case 2:
        topo = gsom::MapTopology::star(1 + static_cast<int>(rng.below(5)),
                                       1 + static_cast<int>(rng.below(7)));
        break;
      case 3: {
        const int k = 2 + static_cast<int>(rng.below(39));
        std::vector<std::pair<int, int>> edges;
        for (int i = 1; i <= k; ++i)
          for (int j = i + 1; j <= k; ++j)
            if (rng.next_double() < 0.1) edges.emplace_back(i, j);
        topo = gsom::MapTopology::from_edges(k, edges);
        break;
      }
    }
    const std::size_t dim = 1 + rng.below(6);
    const std::size_t rows = 50 + rng.below(951);
    std::vector<std::vector<double>> code(static_cast<std::size_t>(topo.unit_count()));
    for (auto& m : code) {
      m.resize(dim);
      for (auto& v : m) v = 2.0 * rng.normal();
    }
    gsom::TrainingConfig cfg;
    cfg.sigma_start = 1.0;
    const gsom::CodebookMap map(topo, std::move(code), cfg, {});
    const auto table = testutil::random_table(rows, dim, 5000 + static_cast<std::uint64_t>(trial), 2.0);

    const auto within = gsom::rqe(map, table);
    const auto ext = gsom::rqe_ext(map, table);
    const auto labels = gsom::assign(map, table);
    const auto part = gsom::components(topo);
    const auto macro = gsom::rqe_macro(table, labels, part);

    if (!close_rel(within.sum, oracle::sc_within(map, table), 1e-12) ||
        !close_rel(within.total, oracle::sc_total(table), 1e-12) ||
        !close_rel(ext.sum, oracle::sc_extended(map, table), 1e-12) ||
        !close_rel(macro.sum, oracle::sc_macro(table, labels, part), 1e-12))
      return {false, "fixture " + std::to_string(trial) + " (" + topo.descriptor() +
                         ") deviates from the brute-force oracle"};
    ++checked;
  }
  return {true, std::to_string(checked) + " fixtures match all three oracles within 1e-12"};
}

// 4. one-step BMU contraction identity and cross-component isolation
Outcome criterion_update_algebra() {
  gsom::Rng rng(91);
  const auto topo = gsom::MapTopology::strings(5, 8);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<std::vector<double>> code(40);
    for (auto& m : code) {
      m.resize(3);
      for (auto& v : m) v = rng.normal();
    }
    gsom::TrainingConfig cfg;
    cfg.sigma_start = 2.0;
    const gsom::CodebookMap map(topo, std::move(code), cfg, {});
    std::vector<double> x = {rng.normal(), rng.normal(), rng.normal()};
    const double alpha = 0.01 + 0.99 * rng.next_double();
    const double sigma = 0.3 + 3.0 * rng.next_double();

    const int c = gsom::bmu(map, x);
    const double before = std::sqrt(gsom::squared_distance(map.codebook[static_cast<std::size_t>(c) - 1], x));
    const auto moved = gsom::update_step(map, x, alpha, sigma);
    const double after = std::sqrt(gsom::squared_distance(moved.codebook[static_cast<std::size_t>(c) - 1], x));
    // h = 1 at the BMU itself
    worst = std::max(worst, std::abs(after - (1.0 - alpha) * before));

    const int comp = topo.component_of(c);
    for (int u = 1; u <= 40; ++u) {
      if (topo.component_of(u) == comp) continue;
      const auto& a = map.codebook[static_cast<std::size_t>(u) - 1];
      const auto& b = moved.codebook[static_cast<std::size_t>(u) - 1];
      if (std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) != 0)
        return {false, "unit " + std::to_string(u) + " outside the BMU component moved"};
    }
  }
  return {worst <= 1e-12,
          "1000 cases: max |after - (1-alpha)*before| = " + fmt(worst) +
              "; other components bit-identical"};
}

// 5. strings beat grid+hac on macro error for almost all seeds
Outcome criterion_topology_ordering() {
  const auto start = std::chrono::steady_clock::now();
  const auto config = benchmark_mixture(1000, 5);  // 5000 rows
  int wins = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto panel = gsom::generate_synthetic_panel(config, seed);
    const auto [table, st] = gsom::standardize(panel);
    gsom::TrainingConfig cfg;
    cfg.seed = seed;
    const auto dsom = gsom::train(table, gsom::MapTopology::strings(5, 8), cfg);
    const auto grid = gsom::train(table, gsom::MapTopology::grid(5, 8), cfg);
    const auto d_macro =
        gsom::rqe_macro(table, gsom::assign(dsom, table), gsom::macro_from_components(dsom.topology));
    const auto g_macro =
        gsom::rqe_macro(table, gsom::assign(grid, table), gsom::hac(grid, 5).first);
    if (d_macro.ratio < g_macro.ratio) ++wins;
  }
  const double secs = seconds_since(start);
  return {wins >= 16 && secs < 120.0,
          "strings(5x8) macro error below grid+hac in " + std::to_string(wins) +
              "/20 seeds; " + fmt(secs) + " s"};
}

// 6. merge-sequence macro error is monotone; the line fixture splits exactly
Outcome criterion_hac() {
  gsom::TrainingConfig fixture_cfg;
  fixture_cfg.sigma_start = 1.0;
  const gsom::CodebookMap line(gsom::MapTopology::grid(2, 2), {{0.0}, {1.0}, {10.0}, {11.0}},
                               fixture_cfg, {});
  const auto [part, trace] = gsom::hac(line, 2);
  const bool fixture_ok = part.class_of(1) == part.class_of(2) &&
                          part.class_of(3) == part.class_of(4) &&
                          part.class_of(1) != part.class_of(3);
  if (!fixture_ok) return {false, "line fixture {0,1}/{10,11} not recovered"};

  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto panel = gsom::generate_synthetic_panel(benchmark_mixture(200, 5), seed);
    const auto [table, st] = gsom::standardize(panel);
    gsom::TrainingConfig cfg;
    cfg.seed = seed;
    cfg.epochs = 10;
    const auto map = gsom::train(table, gsom::MapTopology::grid(5, 8), cfg);
    const auto labels = gsom::assign(map, table);
    const auto seq = gsom::hac_merge_sequence(map);
    double prev = -1.0;
    for (int s = map.unit_count(); s >= 1; --s) {
      const auto cut = gsom::hac_partition_at(seq, map.unit_count(), s);
      const double sum = gsom::rqe_macro(table, labels, cut).sum;
      if (sum < prev)
        return {false, "macro error decreased when merging at S=" + std::to_string(s) +
                           " (seed " + std::to_string(seed) + ")"};
      prev = sum;
    }
  }
  return {true, "line fixture exact; curves monotone for 3 trained maps, no tolerance"};
}

// 7. transition estimation is consistent on a simulated chain
Outcome criterion_estimator_consistency() {
  const auto truth = gsom::TransitionMatrix::from_probabilities({
      {0.60, 0.20, 0.10, 0.05, 0.05},
      {0.10, 0.60, 0.10, 0.10, 0.10},
      {0.25, 0.25, 0.30, 0.10, 0.10},
      {0.05, 0.25, 0.05, 0.50, 0.15},
      {0.05, 0.10, 0.05, 0.10, 0.70},
  });
  const auto sim = gsom::simulate_chain(truth, 100000, 777);
  const auto est = gsom::transition_matrix(sim);
  double worst = 0.0;
  for (int i = 1; i <= 5; ++i)
    for (int j = 1; j <= 5; ++j)
      worst = std::max(worst, std::abs(est.prob(i, j) - truth.prob(i, j)));
  return {worst <= 0.02, "10^5 steps: max entrywise deviation " + fmt(worst)};
}

// 8. the CLI reruns byte-identically for train and transitions
Outcome criterion_cli_determinism(const std::string& cli) {
  if (cli.empty()) return {false, "gsom binary path not provided (argv[1] or GSOM_CLI)"};
  testutil::TempDir dir;
  auto run = [&](const std::string& args) {
    const std::string cmd = cli + " " + args + " > /dev/null 2>&1";
    return WEXITSTATUS(std::system(cmd.c_str()));
  };
  const std::string root = dir.path().string();
  if (run("synth --out " + root + " --seed 5 --individuals 150 --times 5 --periods 2 "
          "--switch-prob 0.2") != 0)
    return {false, "synth failed"};
  const std::string data = " --data " + root + "/samples.csv --attributes component";
  for (const char* sub : {"a", "b"}) {
    fs::create_directories(dir.file(sub));
    if (run("train" + data + " --topology strings:5x8 --epochs 5 --seed 3 --out " +
            (dir.file(sub)).string()) != 0)
      return {false, "train failed"};
  }
  for (const auto& entry : fs::directory_iterator(dir.file("a"))) {
    if (gsom::read_file(entry.path()) !=
        gsom::read_file(dir.file("b") / entry.path().filename()))
      return {false, "train rerun differs in " + entry.path().filename().string()};
  }
  const std::string trans = "transitions" + data + " --labels " + root + "/a/labels.csv" +
                            " --partition " + root + "/a/partition.txt --out ";
  for (const char* sub : {"ta", "tb"}) {
    fs::create_directories(dir.file(sub));
    if (run(trans + dir.file(sub).string()) != 0) return {false, "transitions failed"};
  }
  for (const auto& entry : fs::directory_iterator(dir.file("ta"))) {
    if (gsom::read_file(entry.path()) !=
        gsom::read_file(dir.file("tb") / entry.path().filename()))
      return {false, "transitions rerun differs in " + entry.path().filename().string()};
  }
  return {true, "train and transitions reruns byte-identical"};
}

// 9. standardization moments, row stochasticity, stationary fixed points
Outcome criterion_invariants() {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto table = testutil::random_table(200 + 50 * seed, 4, seed, 3.0);
    const auto [out, st] = gsom::standardize(table);
    const std::size_t n = out.size();
    for (std::size_t d = 0; d < out.feature_count(); ++d) {
      double mean = 0.0;
      for (const auto& r : out.rows()) mean += r.features[d];
      mean /= static_cast<double>(n);
      double var = 0.0;
      for (const auto& r : out.rows()) var += (r.features[d] - mean) * (r.features[d] - mean);
      var /= static_cast<double>(n);
      if (std::abs(mean) >= 1e-10) return {false, "standardized mean " + fmt(mean)};
      if (std::abs(std::sqrt(var) - 1.0) >= 1e-10)
        return {false, "standardized std deviates by " + fmt(std::sqrt(var) - 1.0)};
    }
  }

  gsom::Rng rng(55);
  for (int trial = 0; trial < 5; ++trial) {
    const int s = 2 + static_cast<int>(rng.below(6));
    std::vector<std::vector<std::int64_t>> counts(static_cast<std::size_t>(s),
                                                  std::vector<std::int64_t>(static_cast<std::size_t>(s), 0));
    for (int i = 0; i < s; ++i)
      for (int j = 0; j < s; ++j)
        counts[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
            1 + static_cast<std::int64_t>(rng.below(50));
    const auto tm = gsom::TransitionMatrix::from_counts(counts);
    for (int i = 1; i <= s; ++i) {
      double sum = 0.0;
      for (int j = 1; j <= s; ++j) sum += tm.prob(i, j);
      if (std::abs(sum - 1.0) >= 1e-12) return {false, "row sum deviates by " + fmt(sum - 1.0)};
    }
    const auto pi = gsom::stationary(tm);
    double total = 0.0;
    for (double v : pi) total += v;
    if (std::abs(total - 1.0) >= 1e-12) return {false, "stationary sum " + fmt(total)};
    double residual = 0.0;
    for (int j = 1; j <= s; ++j) {
      double next = 0.0;
      for (int i = 1; i <= s; ++i) next += pi[static_cast<std::size_t>(i) - 1] * tm.prob(i, j);
      residual = std::max(residual, std::abs(next - pi[static_cast<std::size_t>(j) - 1]));
    }
    if (residual >= 1e-8) return {false, "stationary residual " + fmt(residual)};
  }
  return {true, "moments, row sums, and stationary fixed points all within stated bounds"};
}

}  // namespace

int main(int argc, char** argv) {
  std::string cli;
  if (argc > 1) cli = argv[1];
  if (cli.empty() && std::getenv("GSOM_CLI") != nullptr) cli = std::getenv("GSOM_CLI");

  struct Criterion {
    const char* name;
    Outcome outcome;
  };
  const std::vector<Criterion> criteria = {
      {"distance fidelity on the published lattices", criterion_distances()},
      {"stationary distributions of the published matrices", criterion_limit_distributions()},
      {"metric equivalence with brute-force oracles", criterion_metric_oracles()},
      {"one-step update algebra and component isolation", criterion_update_algebra()},
      {"strings vs grid+hac macro-error ordering", criterion_topology_ordering()},
      {"hac monotonicity and line-fixture recovery", criterion_hac()},
      {"markov estimator consistency", criterion_estimator_consistency()},
      {"cli rerun determinism", criterion_cli_determinism(cli)},
      {"standardization and stochasticity invariants", criterion_invariants()},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto& c = criteria[i];
    if (!c.outcome.pass) ++failures;
    std::cout << (c.outcome.pass ? "[PASS]" : "[FAIL]") << " criterion " << (i + 1) << ": "
              << c.name << " - " << c.outcome.detail << "\n";
  }
  std::cout << (failures == 0 ? "all criteria passed"
                              : std::to_string(failures) + " criterion(s) failed")
            << "\n";
  return failures;
}
