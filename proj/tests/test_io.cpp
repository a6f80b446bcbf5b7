#include <catch2/catch_amalgamated.hpp>

#include <cstring>
#include <filesystem>

#include "gsom/io.hpp"
#include "gsom/svg.hpp"
#include "test_util.hpp"

using Catch::Matchers::ContainsSubstring;
using gsom::MapTopology;

TEST_CASE("codebook files round-trip bit-exactly") {
  const auto table = testutil::random_table(30, 3, 5);
  gsom::TrainingConfig cfg;
  cfg.epochs = 2;
  cfg.seed = 9;
  const auto map = gsom::train(table, MapTopology::star(2, 3), cfg);

  testutil::TempDir dir;
  const auto path = dir.file("codebook.txt");
  gsom::save_codebook(path, map);
  const auto loaded = gsom::load_codebook(path);

  CHECK(loaded.unit_count() == map.unit_count());
  CHECK(loaded.dimension() == map.dimension());
  CHECK(loaded.topology.descriptor() == "star:2x3");
  CHECK(loaded.config.epochs == map.config.epochs);
  CHECK(loaded.config.seed == map.config.seed);
  CHECK(loaded.config.sigma_start == map.config.sigma_start);
  CHECK(loaded.feature_names == map.feature_names);
  for (int u = 1; u <= map.unit_count(); ++u)
    for (std::size_t d = 0; d < map.dimension(); ++d) {
      const double a = map.codebook[static_cast<std::size_t>(u) - 1][d];
      const double b = loaded.codebook[static_cast<std::size_t>(u) - 1][d];
      CHECK(std::memcmp(&a, &b, sizeof a) == 0);
    }
}

TEST_CASE("custom topologies embed their edges in the codebook header") {
  const std::vector<std::vector<int>> adj = {
      {0, 1, 0, 1}, {1, 0, 1, 0}, {0, 1, 0, 1}, {1, 0, 1, 0}};
  const auto topo = MapTopology::from_adjacency(adj);
  gsom::TrainingConfig cfg;
  cfg.sigma_start = 1.0;
  const gsom::CodebookMap map(topo, {{0.0}, {1.0}, {2.0}, {3.0}}, cfg, {"f"});

  testutil::TempDir dir;
  const auto path = dir.file("custom.txt");
  gsom::save_codebook(path, map);
  const auto loaded = gsom::load_codebook(path);
  for (int i = 1; i <= 4; ++i)
    for (int j = 1; j <= 4; ++j) CHECK(loaded.topology.distance(i, j) == topo.distance(i, j));
}

TEST_CASE("partition files round-trip") {
  const auto part = gsom::components(MapTopology::strings(3, 4));
  testutil::TempDir dir;
  const auto path = dir.file("partition.txt");
  gsom::save_partition(path, part);
  const auto loaded = gsom::load_partition(path);
  CHECK(loaded.class_count() == 3);
  CHECK(loaded.provenance() == gsom::PartitionProvenance::Components);
  for (int u = 1; u <= 12; ++u) CHECK(loaded.class_of(u) == part.class_of(u));
}

TEST_CASE("matrix files round-trip counts and probabilities") {
  testutil::TempDir dir;
  const auto tm = gsom::TransitionMatrix::from_counts({{8, 2}, {3, 7}});

  const auto counts_path = dir.file("counts.txt");
  gsom::atomic_write(counts_path, gsom::serialize_matrix(tm, true));
  const auto counts = gsom::load_matrix(counts_path);
  CHECK(counts.count(1, 1) == 8);
  CHECK(counts.prob(2, 1) == 0.3);

  const auto probs_path = dir.file("probs.txt");
  gsom::atomic_write(probs_path, gsom::serialize_matrix(tm, false));
  const auto probs = gsom::load_matrix(probs_path);
  CHECK_THAT(probs.prob(1, 1), Catch::Matchers::WithinAbs(0.8, 1e-15));
}

TEST_CASE("percent matrices load through the renormalize flag") {
  testutil::TempDir dir;
  const auto path = dir.file("percent.txt");
  gsom::atomic_write(path, "S=2 kind=probs\n60 40\n25 75\n");
  CHECK_THROWS_AS(gsom::load_matrix(path, false), gsom::Error);
  const auto tm = gsom::load_matrix(path, true);
  CHECK_THAT(tm.prob(1, 1), Catch::Matchers::WithinAbs(0.6, 1e-12));
  CHECK_THAT(tm.prob(2, 2), Catch::Matchers::WithinAbs(0.75, 1e-12));
}

TEST_CASE("adjacency files build topologies") {
  testutil::TempDir dir;
  const auto path = dir.file("adj.txt");
  gsom::atomic_write(path, "4\n1 2\n2 3\n3 4\n");
  const auto topo = gsom::load_adjacency(path);
  CHECK(topo.unit_count() == 4);
  CHECK(topo.distance(1, 4) == 3);
  CHECK(topo.kind() == gsom::LatticeKind::Custom);
}

TEST_CASE("label files align by individual and time") {
  const auto table = testutil::random_table(12, 2, 3);
  std::vector<int> labels;
  for (std::size_t i = 0; i < table.size(); ++i) labels.push_back(static_cast<int>(i % 4) + 1);
  testutil::TempDir dir;
  const auto path = dir.file("labels.csv");
  gsom::save_labels(path, table, labels);
  CHECK(gsom::load_labels(path, table) == labels);

  // reordered table still gets the right labels
  auto rows = table.rows();
  std::reverse(rows.begin(), rows.end());
  std::vector<int> reversed(labels.rbegin(), labels.rend());
  const gsom::SampleTable flipped(table.schema(), rows);
  CHECK(gsom::load_labels(path, flipped) == reversed);
}

TEST_CASE("standardization files round-trip") {
  const auto table = testutil::random_table(40, 2, 21, 3.0);
  const auto [out, st] = gsom::standardize(table);
  testutil::TempDir dir;
  const auto path = dir.file("standardization.csv");
  gsom::atomic_write(path, gsom::serialize_standardization(st, table.schema().names()));
  const auto loaded = gsom::load_standardization(path, table.schema());
  for (std::size_t d = 0; d < 2; ++d) {
    CHECK(loaded.means()[d] == st.means()[d]);
    CHECK(loaded.stds()[d] == st.stds()[d]);
  }
}

TEST_CASE("atomic writes leave no temp files") {
  testutil::TempDir dir;
  gsom::atomic_write(dir.file("out.txt"), "payload\n");
  CHECK(std::filesystem::exists(dir.file("out.txt")));
  CHECK_FALSE(std::filesystem::exists(dir.file("out.txt.tmp")));
  CHECK(gsom::read_file(dir.file("out.txt")) == "payload\n");
}

TEST_CASE("svg outputs are structurally well-formed") {
  gsom::svg::Series series;
  series.label = "curve";
  for (int s = 1; s <= 10; ++s) series.points.emplace_back(s, 100.0 / s);
  const auto chart = gsom::svg::line_chart("quality by class count", "classes", "percent", {series});
  CHECK_THAT(chart, ContainsSubstring("<?xml version=\"1.0\""));
  CHECK_THAT(chart, ContainsSubstring("<svg xmlns"));
  CHECK_THAT(chart, ContainsSubstring("width="));
  CHECK_THAT(chart, ContainsSubstring("height="));
  CHECK_THAT(chart, ContainsSubstring("</svg>"));

  gsom::svg::CellGrid cells = {{1.0, 2.0, std::nullopt}, {0.5, std::nullopt, 3.0}};
  const auto heat = gsom::svg::heatmap("plane", cells, {"row 1", "row 2"});
  CHECK_THAT(heat, ContainsSubstring("</svg>"));
  CHECK_THAT(heat, ContainsSubstring("black ="));

  gsom::svg::CellGrid flat = {{2.0, 2.0}, {2.0, 2.0}};
  const auto uniform = gsom::svg::heatmap("constant plane", flat);
  CHECK_THAT(uniform, ContainsSubstring("constant value"));
  CHECK_THAT(uniform, ContainsSubstring("#808080"));
}

TEST_CASE("unit layout follows the lattice shape") {
  const auto grid = gsom::unit_layout(MapTopology::grid(2, 3));
  REQUIRE(grid.size() == 2);
  CHECK(grid[0] == std::vector<int>{1, 2, 3});
  const auto star = gsom::unit_layout(MapTopology::star(2, 2));
  REQUIRE(star.size() == 3);
  CHECK(star[0] == std::vector<int>{1});
  CHECK(star[1] == std::vector<int>{2, 3});
  CHECK(star[2] == std::vector<int>{4, 5});
}
