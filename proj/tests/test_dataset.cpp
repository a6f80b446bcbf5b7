#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstring>

#include "gsom/dataset.hpp"
#include "gsom/som.hpp"
#include "test_util.hpp"

using Catch::Matchers::ContainsSubstring;
using gsom::FeatureSchema;
using gsom::Observation;
using gsom::SampleTable;

namespace {

FeatureSchema two_feature_schema() {
  return FeatureSchema({"a", "b"}, {{0.0, 10.0}, {-5.0, 5.0}});
}

SampleTable make_table(const std::vector<std::vector<double>>& rows) {
  std::vector<std::string> names;
  for (std::size_t d = 0; d < rows.front().size(); ++d) names.push_back("f" + std::to_string(d + 1));
  std::vector<Observation> obs;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    Observation o;
    o.individual = "x" + std::to_string(i + 1);
    o.time = 1;
    o.features = rows[i];
    obs.push_back(std::move(o));
  }
  return SampleTable(FeatureSchema::unbounded(names), std::move(obs));
}

}  // namespace

TEST_CASE("schema validation") {
  CHECK_THROWS_AS(FeatureSchema({"a", "a"}, {{0, 1}, {0, 1}}), gsom::Error);
  CHECK_THROWS_AS(FeatureSchema({"a", ""}, {{0, 1}, {0, 1}}), gsom::Error);
  CHECK_THROWS_AS(FeatureSchema({"a"}, {{2, 1}}), gsom::Error);
  CHECK_THROWS_WITH(FeatureSchema({"a"}, {{2, 1}}), ContainsSubstring("min > max"));
}

TEST_CASE("table rejects duplicate individual-time keys") {
  Observation a;
  a.individual = "7";
  a.time = 1984;
  a.features = {1.0, 2.0};
  Observation b = a;
  CHECK_THROWS_WITH(SampleTable(two_feature_schema(), {a, b}),
                    ContainsSubstring("duplicate (individual=7, time=1984)"));
}

TEST_CASE("load_samples parses a small file") {
  testutil::TempDir dir;
  const auto path = dir.file("panel.csv");
  gsom::atomic_write(path,
                     "id,year,period,ignored,a,b\n"
                     "p1,1984,1,zzz,1.5,0.25\n"
                     "p1,1986,1,zzz,2.5,-0.5\n"
                     "p2,1984,1,zzz,3.5,4\n");
  gsom::ColumnMap map;
  map.time = "year";
  const auto table = gsom::load_samples(path, two_feature_schema(), map);
  REQUIRE(table.size() == 3);
  CHECK(table.rows()[0].features == std::vector<double>{1.5, 0.25});
  CHECK(table.rows()[2].individual == "p2");
  CHECK(table.rows()[1].time == 1986);
  CHECK(table.rows()[1].source_row == 3);  // file line number
}

TEST_CASE("load_samples error paths") {
  testutil::TempDir dir;
  gsom::ColumnMap map;
  map.time = "year";

  SECTION("missing mapped column is named") {
    const auto path = dir.file("missing.csv");
    gsom::atomic_write(path, "id,year,period,a\np1,1984,1,1.0\n");
    CHECK_THROWS_WITH(gsom::load_samples(path, two_feature_schema(), map),
                      ContainsSubstring("missing mapped column 'b'"));
  }
  SECTION("duplicate key cites both rows") {
    const auto path = dir.file("dup.csv");
    gsom::atomic_write(path,
                       "id,year,period,a,b\n"
                       "7,1984,1,1,1\n"
                       "8,1984,1,1,1\n"
                       "7,1984,1,2,2\n");
    CHECK_THROWS_WITH(gsom::load_samples(path, two_feature_schema(), map),
                      ContainsSubstring("rows 2 and 4"));
  }
  SECTION("unparseable numeric cell carries its line number") {
    const auto path = dir.file("bad.csv");
    gsom::atomic_write(path, "id,year,period,a,b\np1,1984,1,oops,1\n");
    CHECK_THROWS_WITH(gsom::load_samples(path, two_feature_schema(), map),
                      ContainsSubstring(":2: cannot parse number 'oops'"));
  }
  SECTION("empty feature cells become NaN for clean to reject") {
    const auto path = dir.file("gap.csv");
    gsom::atomic_write(path, "id,year,period,a,b\np1,1984,1,,1\n");
    const auto table = gsom::load_samples(path, two_feature_schema(), map);
    REQUIRE(table.size() == 1);
    CHECK(std::isnan(table.rows()[0].features[0]));
  }
}

TEST_CASE("loader applies the optional deflator column") {
  testutil::TempDir dir;
  const auto path = dir.file("defl.csv");
  gsom::atomic_write(path,
                     "id,time,period,a,b,px\n"
                     "p1,1,1,10,2,0.5\n"
                     "p2,1,1,10,2,2\n");
  gsom::ColumnMap map;
  map.deflator = "px";
  map.deflate_features = {"a"};
  const auto table = gsom::load_samples(path, two_feature_schema(), map);
  CHECK(table.rows()[0].features[0] == 5.0);
  CHECK(table.rows()[1].features[0] == 20.0);
  CHECK(table.rows()[0].features[1] == 2.0);  // untouched
}

TEST_CASE("clean drops rows outside schema bounds") {
  FeatureSchema schema({"nbhtrav", "nbstrav"}, {{0, 112}, {0, 52}});
  auto row = [](const std::string& id, double a, double b) {
    Observation o;
    o.individual = id;
    o.time = 1;
    o.features = {a, b};
    return o;
  };
  SampleTable table(schema, {row("ok", 40, 48), row("high", 40, 53), row("neg", -1, 10)});
  const auto [kept, report] = gsom::clean(table);
  REQUIRE(kept.size() == 1);
  CHECK(kept.rows()[0].individual == "ok");
  REQUIRE(report.rejections.size() == 2);
  CHECK(report.rejections[0].feature == "nbstrav");
  CHECK(report.rejections[0].value == 53.0);
  CHECK(report.rejections[0].reason == "bounds");
  CHECK(report.rejections[1].feature == "nbhtrav");
  CHECK(report.rejections[1].value == -1.0);
}

TEST_CASE("clean keeps in-bounds tables untouched and is idempotent") {
  FeatureSchema schema({"a"}, {{0, 10}});
  std::vector<Observation> rows;
  for (int i = 0; i < 5; ++i) {
    Observation o;
    o.individual = std::to_string(i);
    o.time = 1;
    o.features = {static_cast<double>(i)};
    rows.push_back(o);
  }
  SampleTable table(schema, rows);
  const auto [kept, report] = gsom::clean(table);
  CHECK(kept.size() == table.size());
  CHECK(report.empty());
  const auto [kept2, report2] = gsom::clean(kept);
  CHECK(kept2.size() == kept.size());
  CHECK(report2.empty());
}

TEST_CASE("clean rejects missing cells with reason missing") {
  FeatureSchema schema({"a"}, {{0, 10}});
  Observation o;
  o.individual = "m";
  o.time = 1;
  o.features = {std::numeric_limits<double>::quiet_NaN()};
  const auto [kept, report] = gsom::clean(SampleTable(schema, {o}));
  CHECK(kept.empty());
  REQUIRE(report.rejections.size() == 1);
  CHECK(report.rejections[0].reason == "missing");
}

TEST_CASE("standardize matches the hand-computed oracle") {
  // values (1,2,3): population std = sqrt(((1)^2+0+(1)^2)/3) = sqrt(2/3)
  const auto table = make_table({{1.0}, {2.0}, {3.0}});
  const auto [out, st] = gsom::standardize(table);
  CHECK(st.means()[0] == 2.0);
  CHECK_THAT(st.stds()[0], Catch::Matchers::WithinAbs(0.8164965809277260, 1e-15));
  CHECK_THAT(out.rows()[0].features[0], Catch::Matchers::WithinAbs(-1.2247448713915890, 1e-12));
  CHECK_THAT(out.rows()[1].features[0], Catch::Matchers::WithinAbs(0.0, 1e-15));
  CHECK_THAT(out.rows()[2].features[0], Catch::Matchers::WithinAbs(1.2247448713915890, 1e-12));
}

TEST_CASE("standardize is idempotent on fitted data") {
  const auto table = testutil::random_table(64, 3, 7, 4.0);
  const auto [once, st1] = gsom::standardize(table);
  const auto [twice, st2] = gsom::standardize(once);
  for (std::size_t i = 0; i < once.size(); ++i)
    for (std::size_t d = 0; d < once.feature_count(); ++d)
      CHECK_THAT(twice.rows()[i].features[d],
                 Catch::Matchers::WithinAbs(once.rows()[i].features[d], 1e-12));
}

TEST_CASE("standardize rejects constant features by name") {
  const auto table = make_table({{5.0, 1.0}, {5.0, 2.0}, {5.0, 3.0}});
  CHECK_THROWS_WITH(gsom::standardize(table), ContainsSubstring("zero variance in feature 'f1'"));
}

TEST_CASE("standardized output has zero mean and unit std") {
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    const auto table = testutil::random_table(200, 4, seed, 3.0);
    const auto [out, st] = gsom::standardize(table);
    const std::size_t n = out.size();
    for (std::size_t d = 0; d < out.feature_count(); ++d) {
      double mean = 0.0;
      for (const auto& r : out.rows()) mean += r.features[d];
      mean /= static_cast<double>(n);
      double var = 0.0;
      for (const auto& r : out.rows()) var += (r.features[d] - mean) * (r.features[d] - mean);
      var /= static_cast<double>(n);
      CHECK(std::abs(mean) < 1e-10);
      CHECK(std::abs(std::sqrt(var) - 1.0) < 1e-10);
    }
  }
}

TEST_CASE("correlation matrix basics") {
  const auto table = testutil::random_table(100, 3, 11);
  const auto corr = gsom::correlation_matrix(table);
  for (std::size_t a = 0; a < 3; ++a) {
    CHECK(corr[a][a] == 1.0);
    for (std::size_t b = 0; b < 3; ++b) {
      CHECK(corr[a][b] == corr[b][a]);
      CHECK(corr[a][b] >= -1.0 - 1e-12);
      CHECK(corr[a][b] <= 1.0 + 1e-12);
    }
  }
}

TEST_CASE("affine feature pairs correlate to one") {
  std::vector<std::vector<double>> rows;
  gsom::Rng rng(5);
  for (int i = 0; i < 50; ++i) {
    const double x = rng.normal();
    rows.push_back({x, 2.0 * x + 3.0});
  }
  const auto corr = gsom::correlation_matrix(make_table(rows));
  CHECK_THAT(corr[0][1], Catch::Matchers::WithinAbs(1.0, 1e-12));
}

TEST_CASE("correlation rejects constant features") {
  CHECK_THROWS_AS(gsom::correlation_matrix(make_table({{1.0, 1.0}, {1.0, 2.0}})), gsom::Error);
}

TEST_CASE("synthetic panel is deterministic and trajectory-complete") {
  gsom::SyntheticPanelConfig config;
  config.components = {{{0.0, 0.0}, {1.0, 1.0}, 1.0}, {{8.0, 8.0}, {1.0, 1.0}, 1.0}};
  config.individuals = 100;
  config.times = 5;
  const auto a = gsom::generate_synthetic_panel(config, 42);
  const auto b = gsom::generate_synthetic_panel(config, 42);
  CHECK(gsom::serialize_samples(a) == gsom::serialize_samples(b));
  REQUIRE(a.size() == 500);

  std::map<std::string, std::set<std::int64_t>> times_of;
  for (const auto& r : a.rows()) times_of[r.individual].insert(r.time);
  REQUIRE(times_of.size() == 100);
  for (const auto& [id, times] : times_of) CHECK(times.size() == 5);

  const auto c = gsom::generate_synthetic_panel(config, 43);
  CHECK(gsom::serialize_samples(a) != gsom::serialize_samples(c));
}

TEST_CASE("well-separated synthetic components are recoverable by nearest mean") {
  gsom::SyntheticPanelConfig config;
  config.components = {{{0.0, 0.0}, {1.0, 1.0}, 1.0}, {{8.0, 8.0}, {1.0, 1.0}, 1.0}};
  config.individuals = 100;
  config.times = 5;
  const auto table = gsom::generate_synthetic_panel(config, 7);
  std::size_t hits = 0;
  for (const auto& r : table.rows()) {
    const double d0 = gsom::squared_distance(r.features, config.components[0].mean);
    const double d1 = gsom::squared_distance(r.features, config.components[1].mean);
    const std::string nearest = d0 <= d1 ? "1" : "2";
    if (nearest == r.attributes.at("component")) ++hits;
  }
  CHECK(static_cast<double>(hits) / static_cast<double>(table.size()) >= 0.99);
}

TEST_CASE("synthetic panel validation") {
  gsom::SyntheticPanelConfig config;
  CHECK_THROWS_WITH(gsom::generate_synthetic_panel(config, 1), ContainsSubstring("no components"));
  config.components = {{{0.0}, {1.0}, -1.0}};
  CHECK_THROWS_WITH(gsom::generate_synthetic_panel(config, 1), ContainsSubstring("weight"));
  config.components = {{{0.0}, {0.0}, 1.0}};
  CHECK_THROWS_WITH(gsom::generate_synthetic_panel(config, 1), ContainsSubstring("stddev"));
}

TEST_CASE("feature values round-trip through save and load") {
  gsom::Rng rng(99);
  std::vector<Observation> rows;
  for (int i = 0; i < 40; ++i) {
    Observation o;
    o.individual = "r" + std::to_string(i);
    o.time = i;
    // decimal literals of <= 15 significant digits
    const double v = std::round(rng.normal() * 1e6) / 1e6;
    o.features = {v, rng.next_double()};
    rows.push_back(std::move(o));
  }
  SampleTable table(FeatureSchema::unbounded({"a", "b"}), rows);

  testutil::TempDir dir;
  const auto path = dir.file("round.csv");
  gsom::save_samples(path, table);
  const auto loaded = gsom::load_samples(path, table.schema());
  REQUIRE(loaded.size() == table.size());
  for (std::size_t i = 0; i < table.size(); ++i)
    for (std::size_t d = 0; d < 2; ++d) {
      const double x = table.rows()[i].features[d];
      const double y = loaded.rows()[i].features[d];
      CHECK(std::memcmp(&x, &y, sizeof x) == 0);
    }
}
