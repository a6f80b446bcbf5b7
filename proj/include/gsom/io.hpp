#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "gsom/csv.hpp"
#include "gsom/dataset.hpp"
#include "gsom/error.hpp"
#include "gsom/partition.hpp"
#include "gsom/som.hpp"
#include "gsom/topology.hpp"
#include "gsom/trajectory.hpp"

namespace gsom {

namespace detail {

/// Parses "# key=value key=value ..." headers.
inline std::map<std::string, std::string> parse_header(const std::string& line,
                                                       const std::string& where) {
  require(!line.empty() && line[0] == '#', where + ": missing '#' header line");
  std::map<std::string, std::string> out;
  std::istringstream ss(line.substr(1));
  std::string token;
  while (ss >> token) {
    auto eq = token.find('=');
    require(eq != std::string::npos, where + ": malformed header token '" + token + "'");
    out[token.substr(0, eq)] = token.substr(eq + 1);
  }
  return out;
}

inline std::string header_get(const std::map<std::string, std::string>& header,
                              const std::string& key, const std::string& where) {
  auto it = header.find(key);
  require(it != header.end(), where + ": header lacks '" + key + "'");
  return it->second;
}

inline std::vector<std::string> split_on(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    std::size_t pos = s.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(s.substr(start));
      break;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

/// Splits a line on spaces, tabs, or commas (matrix/distribution files).
inline std::vector<std::string> split_loose(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ' ' || c == '\t' || c == ',' || c == '\r') {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

}  // namespace detail

/// Rebuilds a lattice from its one-token descriptor; custom graphs need the
/// edge list (see save_codebook).
inline MapTopology topology_from_descriptor(const std::string& descriptor,
                                            const std::string& edges = "") {
  auto colon = descriptor.find(':');
  require(colon != std::string::npos, "bad topology descriptor '" + descriptor + "'");
  const std::string kind = descriptor.substr(0, colon);
  const std::string params = descriptor.substr(colon + 1);
  if (kind == "custom") {
    const int k = static_cast<int>(parse_int(params, "topology descriptor"));
    std::vector<std::pair<int, int>> edge_list;
    if (!edges.empty())
      for (const auto& token : detail::split_on(edges, ';')) {
        auto dash = token.find('-');
        require(dash != std::string::npos, "bad edge token '" + token + "'");
        edge_list.emplace_back(
            static_cast<int>(parse_int(token.substr(0, dash), "edge list")),
            static_cast<int>(parse_int(token.substr(dash + 1), "edge list")));
      }
    return MapTopology::from_edges(k, edge_list);
  }
  auto x = params.find('x');
  require(x != std::string::npos, "bad topology descriptor '" + descriptor + "'");
  const int a = static_cast<int>(parse_int(params.substr(0, x), "topology descriptor"));
  const int b = static_cast<int>(parse_int(params.substr(x + 1), "topology descriptor"));
  if (kind == "grid") return MapTopology::grid(a, b);
  if (kind == "strings") return MapTopology::strings(a, b);
  if (kind == "star") return MapTopology::star(a, b);
  throw Error("unknown topology kind '" + kind + "'");
}

inline std::string serialize_codebook(const CodebookMap& map) {
  std::string out = "# K=" + std::to_string(map.unit_count()) +
                    " D=" + std::to_string(map.dimension()) +
                    " topology=" + map.topology.descriptor();
  const TrainingConfig& c = map.config;
  out += " epochs=" + std::to_string(c.epochs);
  out += " alpha_start=" + format_roundtrip(c.alpha_start);
  out += " alpha_end=" + format_roundtrip(c.alpha_end);
  out += " sigma_start=" + format_roundtrip(c.sigma_start);
  out += " sigma_end=" + format_roundtrip(c.sigma_end);
  out += " kernel=" + to_string(c.kernel);
  out += " seed=" + std::to_string(c.seed);
  if (!map.feature_names.empty()) {
    out += " features=";
    for (std::size_t d = 0; d < map.feature_names.size(); ++d)
      out += (d ? "," : "") + map.feature_names[d];
  }
  if (map.topology.kind() == LatticeKind::Custom) {
    out += " edges=";
    const auto edges = map.topology.edges();
    for (std::size_t e = 0; e < edges.size(); ++e)
      out += (e ? ";" : "") + std::to_string(edges[e].first) + "-" + std::to_string(edges[e].second);
  }
  out += "\n";
  for (int u = 1; u <= map.unit_count(); ++u) {
    out += std::to_string(u);
    for (double v : map.codebook[static_cast<std::size_t>(u) - 1]) out += "," + format_roundtrip(v);
    out += "\n";
  }
  return out;
}

inline void save_codebook(const std::filesystem::path& path, const CodebookMap& map) {
  atomic_write(path, serialize_codebook(map));
}

inline CodebookMap load_codebook(const std::filesystem::path& path) {
  const std::string where = path.string();
  std::istringstream in(read_file(path));
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), where + ": empty file");
  auto header = detail::parse_header(line, where);
  const int k = static_cast<int>(parse_int(detail::header_get(header, "K", where), where));
  const std::size_t dim =
      static_cast<std::size_t>(parse_int(detail::header_get(header, "D", where), where));
  auto edges_it = header.find("edges");
  MapTopology topo = topology_from_descriptor(detail::header_get(header, "topology", where),
                                              edges_it == header.end() ? "" : edges_it->second);
  require(topo.unit_count() == k, where + ": K does not match topology");

  TrainingConfig config;
  config.epochs = static_cast<int>(parse_int(detail::header_get(header, "epochs", where), where));
  config.alpha_start = parse_double(detail::header_get(header, "alpha_start", where), where);
  config.alpha_end = parse_double(detail::header_get(header, "alpha_end", where), where);
  config.sigma_start = parse_double(detail::header_get(header, "sigma_start", where), where);
  config.sigma_end = parse_double(detail::header_get(header, "sigma_end", where), where);
  const std::string kernel = detail::header_get(header, "kernel", where);
  require(kernel == "gaussian" || kernel == "indicator", where + ": unknown kernel " + kernel);
  config.kernel = kernel == "gaussian" ? Kernel::Gaussian : Kernel::Indicator;
  config.seed = static_cast<std::uint64_t>(parse_int(detail::header_get(header, "seed", where), where));

  std::vector<std::string> names;
  if (auto it = header.find("features"); it != header.end()) {
    names = detail::split_on(it->second, ',');
    require(names.size() == dim, where + ": features count differs from D");
  }

  std::vector<std::vector<double>> code(static_cast<std::size_t>(k));
  int seen = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    auto fields = split_csv_line(line);
    require(fields.size() == dim + 1, where + ": expected unit id plus " + std::to_string(dim) + " values");
    const int unit = static_cast<int>(parse_int(fields[0], where));
    require(unit >= 1 && unit <= k, where + ": unit id out of range");
    auto& row = code[static_cast<std::size_t>(unit) - 1];
    require(row.empty(), where + ": duplicate unit " + std::to_string(unit));
    row.reserve(dim);
    for (std::size_t d = 1; d <= dim; ++d) row.push_back(parse_double(fields[d], where));
    ++seen;
  }
  require(seen == k, where + ": expected " + std::to_string(k) + " units, found " + std::to_string(seen));
  return CodebookMap(std::move(topo), std::move(code), config, std::move(names));
}

inline std::string serialize_partition(const MacroPartition& partition) {
  std::string out = "# S=" + std::to_string(partition.class_count()) +
                    " provenance=" + to_string(partition.provenance()) + "\n";
  for (int u = 1; u <= partition.unit_count(); ++u)
    out += std::to_string(u) + " " + std::to_string(partition.class_of(u)) + "\n";
  return out;
}

inline void save_partition(const std::filesystem::path& path, const MacroPartition& partition) {
  atomic_write(path, serialize_partition(partition));
}

inline MacroPartition load_partition(const std::filesystem::path& path) {
  const std::string where = path.string();
  std::istringstream in(read_file(path));
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), where + ": empty file");
  auto header = detail::parse_header(line, where);
  const std::string prov = detail::header_get(header, "provenance", where);
  PartitionProvenance provenance = PartitionProvenance::Components;
  if (prov == "star_rays")
    provenance = PartitionProvenance::StarRays;
  else if (prov == "hac")
    provenance = PartitionProvenance::Hac;
  else
    require(prov == "components", where + ": unknown provenance " + prov);
  std::map<int, int> u2c;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    auto fields = detail::split_loose(line);
    require(fields.size() == 2, where + ": expected 'unit class' lines");
    u2c[static_cast<int>(parse_int(fields[0], where))] =
        static_cast<int>(parse_int(fields[1], where));
  }
  require(!u2c.empty(), where + ": no units");
  std::vector<int> vec(u2c.size());
  for (auto [u, c] : u2c) {
    require(u >= 1 && u <= static_cast<int>(u2c.size()), where + ": unit ids must cover 1..K");
    vec[static_cast<std::size_t>(u) - 1] = c;
  }
  MacroPartition partition(std::move(vec), provenance);
  const int s = static_cast<int>(parse_int(detail::header_get(header, "S", where), where));
  require(partition.class_count() == s, where + ": S does not match assignments");
  return partition;
}

/// Transition matrix file: `S=<n> kind=<counts|probs>` then S lines of S
/// values (space or comma separated).
inline std::string serialize_matrix(const TransitionMatrix& tm, bool as_counts) {
  std::string out = "S=" + std::to_string(tm.state_count()) +
                    " kind=" + (as_counts ? "counts" : "probs") + "\n";
  for (int i = 1; i <= tm.state_count(); ++i) {
    for (int j = 1; j <= tm.state_count(); ++j) {
      if (j > 1) out += " ";
      out += as_counts ? std::to_string(tm.count(i, j)) : format_roundtrip(tm.prob(i, j));
    }
    out += "\n";
  }
  return out;
}

/// Loads a matrix file; `renormalize` scales probability rows to sum to 1
/// (for percent-valued published tables).
inline TransitionMatrix load_matrix(const std::filesystem::path& path, bool renormalize = false) {
  const std::string where = path.string();
  std::istringstream in(read_file(path));
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), where + ": empty file");
  auto header = detail::parse_header("# " + line, where);
  const int s = static_cast<int>(parse_int(detail::header_get(header, "S", where), where));
  const std::string kind = detail::header_get(header, "kind", where);
  require(kind == "counts" || kind == "probs", where + ": kind must be counts or probs");
  require(s >= 1, where + ": S must be positive");
  std::vector<std::vector<double>> values;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    auto fields = detail::split_loose(line);
    require(static_cast<int>(fields.size()) == s, where + ": expected " + std::to_string(s) + " values per line");
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) row.push_back(parse_double(f, where));
    values.push_back(std::move(row));
  }
  require(static_cast<int>(values.size()) == s, where + ": expected " + std::to_string(s) + " rows");
  if (kind == "counts") {
    std::vector<std::vector<std::int64_t>> counts(static_cast<std::size_t>(s));
    for (int i = 0; i < s; ++i)
      for (double v : values[static_cast<std::size_t>(i)]) {
        require(v >= 0 && v == static_cast<double>(static_cast<std::int64_t>(v)),
                where + ": counts must be non-negative integers");
        counts[static_cast<std::size_t>(i)].push_back(static_cast<std::int64_t>(v));
      }
    return TransitionMatrix::from_counts(std::move(counts));
  }
  return TransitionMatrix::from_probabilities(std::move(values), renormalize);
}

/// Adjacency file: first line K, then `i j` edges, 1-indexed.
inline MapTopology load_adjacency(const std::filesystem::path& path) {
  const std::string where = path.string();
  std::istringstream in(read_file(path));
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), where + ": empty file");
  auto first = detail::split_loose(line);
  require(first.size() == 1, where + ": first line must hold the unit count");
  const int k = static_cast<int>(parse_int(first[0], where));
  std::vector<std::pair<int, int>> edges;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    auto fields = detail::split_loose(line);
    require(fields.size() == 2, where + ": expected 'i j' edge lines");
    edges.emplace_back(static_cast<int>(parse_int(fields[0], where)),
                       static_cast<int>(parse_int(fields[1], where)));
  }
  return MapTopology::from_edges(k, edges);
}

/// Distance matrix dump, `inf` marking cross-component pairs.
inline std::string serialize_distances(const MapTopology& topo) {
  std::string out;
  for (int i = 1; i <= topo.unit_count(); ++i) {
    for (int j = 1; j <= topo.unit_count(); ++j) {
      if (j > 1) out += ",";
      const int d = topo.distance(i, j);
      out += d == kUnreachable ? "inf" : std::to_string(d);
    }
    out += "\n";
  }
  return out;
}

/// Per-row unit assignments, joinable back onto a table by (id, time).
inline std::string serialize_labels(const SampleTable& table, const std::vector<int>& unit_labels) {
  require(unit_labels.size() == table.size(), "serialize_labels: labels/table size mismatch");
  std::string out = "id,time,period,unit\n";
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto& r = table.rows()[i];
    out += r.individual + "," + std::to_string(r.time) + "," + std::to_string(r.period) + "," +
           std::to_string(unit_labels[i]) + "\n";
  }
  return out;
}

inline void save_labels(const std::filesystem::path& path, const SampleTable& table,
                        const std::vector<int>& unit_labels) {
  atomic_write(path, serialize_labels(table, unit_labels));
}

/// Loads unit labels and aligns them with `table` rows by (id, time).
inline std::vector<int> load_labels(const std::filesystem::path& path, const SampleTable& table) {
  const std::string where = path.string();
  CsvFile csv = read_csv(path);
  const int id_col = csv.column("id");
  const int time_col = csv.column("time");
  const int unit_col = csv.column("unit");
  require(id_col >= 0 && time_col >= 0 && unit_col >= 0,
          where + ": need columns id, time, unit");
  std::map<std::pair<std::string, std::int64_t>, int> by_key;
  for (const auto& row : csv.rows) {
    by_key[{row[static_cast<std::size_t>(id_col)],
            parse_int(row[static_cast<std::size_t>(time_col)], where)}] =
        static_cast<int>(parse_int(row[static_cast<std::size_t>(unit_col)], where));
  }
  std::vector<int> labels;
  labels.reserve(table.size());
  for (const auto& r : table.rows()) {
    auto it = by_key.find({r.individual, r.time});
    require(it != by_key.end(), where + ": no label for (individual=" + r.individual +
                                    ", time=" + std::to_string(r.time) + ")");
    labels.push_back(it->second);
  }
  return labels;
}

inline std::string serialize_standardization(const Standardization& st,
                                             const std::vector<std::string>& names) {
  require(names.size() == st.means().size(), "serialize_standardization: names size mismatch");
  std::string out = "feature,mean,std\n";
  for (std::size_t d = 0; d < names.size(); ++d)
    out += names[d] + "," + format_roundtrip(st.means()[d]) + "," +
           format_roundtrip(st.stds()[d]) + "\n";
  return out;
}

inline Standardization load_standardization(const std::filesystem::path& path,
                                            const FeatureSchema& schema) {
  const std::string where = path.string();
  CsvFile csv = read_csv(path);
  const int f_col = csv.column("feature");
  const int m_col = csv.column("mean");
  const int s_col = csv.column("std");
  require(f_col >= 0 && m_col >= 0 && s_col >= 0, where + ": need columns feature, mean, std");
  std::map<std::string, std::pair<double, double>> by_name;
  for (const auto& row : csv.rows)
    by_name[row[static_cast<std::size_t>(f_col)]] = {
        parse_double(row[static_cast<std::size_t>(m_col)], where),
        parse_double(row[static_cast<std::size_t>(s_col)], where)};
  std::vector<double> means, stds;
  for (const auto& name : schema.names()) {
    auto it = by_name.find(name);
    require(it != by_name.end(), where + ": no entry for feature '" + name + "'");
    means.push_back(it->second.first);
    stds.push_back(it->second.second);
  }
  return Standardization(std::move(means), std::move(stds));
}

/// Probability vector as `class,probability` lines.
inline std::string serialize_distribution(const std::vector<double>& dist,
                                          const std::string& value_header = "probability") {
  std::string out = "class," + value_header + "\n";
  for (std::size_t s = 0; s < dist.size(); ++s)
    out += std::to_string(s + 1) + "," + format_sig(dist[s]) + "\n";
  return out;
}

}  // namespace gsom
