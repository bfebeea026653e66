#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "homsample/errors.hpp"
#include "homsample/features.hpp"
#include "homsample/graph.hpp"
#include "homsample/sampling.hpp"

namespace homsample::io {

namespace fs = std::filesystem;

/// Shortest form is not used on purpose: every double is written with 17
/// significant digits so files are canonical and round-trip exactly.
inline std::string format_double(double v) {
  if (!std::isfinite(v)) throw NumericalError("cannot serialize non-finite value");
  if (v == 0.0) v = 0.0;  // drop the sign of -0
  char buf[32];
  const int len = std::snprintf(buf, sizeof buf, "%.17g", v);
  return {buf, static_cast<std::size_t>(len)};
}

inline std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw DataError("read failure on '" + path.string() + "'");
  return buf.str();
}

inline void write_text(const fs::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.flush();
  if (!out) throw DataError("write failure on '" + path.string() + "'");
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

/// Splits into lines and drops trailing blank lines.
inline std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    const auto end = text.find('\n', start);
    const auto stop = end == std::string_view::npos ? text.size() : end;
    lines.push_back(text.substr(start, stop - start));
    start = stop + 1;
  }
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  return lines;
}

template <class T>
std::optional<T> parse_number(std::string_view token) {
  T value{};
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size() || token.empty()) return std::nullopt;
  return value;
}

inline std::string where(std::string_view source, std::size_t line) {
  return std::string(source) + ":" + std::to_string(line);
}

}  // namespace detail

/// Whitespace-separated "u v" lines. '#' starts a comment line; an optional
/// "n=<count>" line before the first edge declares the node count.
inline Graph parse_edge_list(std::string_view text, std::string_view source = "<edges>") {
  std::vector<Edge> edges;
  std::optional<NodeId> declared;
  const auto lines = detail::lines_of(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto line = detail::trim(lines[i]);
    if (line.empty() || line.front() == '#') continue;
    if (line.starts_with("n=")) {
      if (declared || !edges.empty()) throw DataError(detail::where(source, i + 1) + ": node count header must precede all edges");
      const auto n = detail::parse_number<NodeId>(detail::trim(line.substr(2)));
      if (!n || *n < 0) throw DataError(detail::where(source, i + 1) + ": invalid node count '" + std::string(line) + "'");
      declared = *n;
      continue;
    }
    std::istringstream tokens{std::string(line)};
    std::vector<std::string> parts;
    for (std::string t; tokens >> t;) parts.push_back(t);
    if (parts.size() != 2) {
      throw DataError(detail::where(source, i + 1) + ": expected 2 node ids, got " + std::to_string(parts.size()));
    }
    NodeId ids[2];
    for (int k = 0; k < 2; ++k) {
      const auto v = detail::parse_number<NodeId>(parts[static_cast<std::size_t>(k)]);
      if (!v) throw DataError(detail::where(source, i + 1) + ": non-integer token '" + parts[static_cast<std::size_t>(k)] + "'");
      if (*v < 0) throw DataError(detail::where(source, i + 1) + ": negative node id " + std::to_string(*v));
      ids[k] = *v;
    }
    edges.emplace_back(ids[0], ids[1]);
  }
  if (edges.empty() && !declared) throw DataError(std::string(source) + ": empty graph");
  return build_graph(edges, declared);
}

inline Graph read_edge_list(const fs::path& path) { return parse_edge_list(read_text(path), path.string()); }

/// Canonical form: "n=<count>" then one "u v" line per edge, u < v, sorted.
inline std::string format_edge_list(const Graph& g) {
  std::string out = "n=" + std::to_string(g.num_nodes()) + "\n";
  g.for_each_edge([&](NodeId u, NodeId v) {
    out += std::to_string(u);
    out += ' ';
    out += std::to_string(v);
    out += '\n';
  });
  return out;
}

inline void write_edge_list(const Graph& g, const fs::path& path) { write_text(path, format_edge_list(g)); }

/// Headerless CSV of reals, one row per node.
inline FeatureMatrix parse_features_csv(std::string_view text, std::string_view source = "<features>") {
  const auto lines = detail::lines_of(text);
  if (lines.empty()) throw DataError(std::string(source) + ": empty feature file");
  std::vector<double> values;
  std::size_t width = 0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto line = detail::trim(lines[i]);
    if (line.empty()) throw DataError(detail::where(source, i + 1) + ": blank row");
    std::size_t cols = 0;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      const auto cell = detail::trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start));
      const auto v = detail::parse_number<double>(cell);
      if (!v || !std::isfinite(*v)) {
        throw DataError(detail::where(source, i + 1) + ", column " + std::to_string(cols + 1) + ": non-numeric cell '" +
                        std::string(cell) + "'");
      }
      values.push_back(*v);
      ++cols;
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (i == 0) width = cols;
    if (cols != width) {
      throw DataError(detail::where(source, i + 1) + ": expected " + std::to_string(width) + " columns, got " +
                      std::to_string(cols));
    }
  }
  FeatureMatrix x(static_cast<Eigen::Index>(lines.size()), static_cast<Eigen::Index>(width));
  std::copy(values.begin(), values.end(), x.data());
  return x;
}

inline FeatureMatrix read_features_csv(const fs::path& path) {
  return parse_features_csv(read_text(path), path.string());
}

inline std::string format_features_csv(const FeatureMatrix& x) {
  std::string out;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      if (j > 0) out += ',';
      out += format_double(x(i, j));
    }
    out += '\n';
  }
  return out;
}

inline void write_features_csv(const FeatureMatrix& x, const fs::path& path) { write_text(path, format_features_csv(x)); }

/// Single integer column, one row per node. Negative values mark unlabeled nodes.
inline Labels parse_labels_csv(std::string_view text, std::string_view source = "<labels>") {
  const auto lines = detail::lines_of(text);
  if (lines.empty()) throw DataError(std::string(source) + ": empty label file");
  Labels labels;
  labels.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto cell = detail::trim(lines[i]);
    const auto v = detail::parse_number<int>(cell);
    if (!v) throw DataError(detail::where(source, i + 1) + ", column 1: non-integer label '" + std::string(cell) + "'");
    labels.push_back(*v);
  }
  return labels;
}

inline Labels read_labels_csv(const fs::path& path) { return parse_labels_csv(read_text(path), path.string()); }

inline std::string format_labels_csv(const Labels& labels) {
  std::string out;
  for (int l : labels) out += std::to_string(l) + "\n";
  return out;
}

inline void write_labels_csv(const Labels& labels, const fs::path& path) { write_text(path, format_labels_csv(labels)); }

struct Dataset {
  Graph graph;
  std::optional<FeatureMatrix> features;
  std::optional<Labels> labels;
};

/// Loads a graph plus optional features and labels and cross-checks row counts.
inline Dataset load_dataset(const fs::path& graph_path, const std::optional<fs::path>& features_path = std::nullopt,
                            const std::optional<fs::path>& labels_path = std::nullopt) {
  Dataset ds;
  ds.graph = read_edge_list(graph_path);
  const auto n = ds.graph.num_nodes();
  if (features_path) {
    ds.features = read_features_csv(*features_path);
    if (ds.features->rows() != n) {
      throw DataError(features_path->string() + ": " + std::to_string(ds.features->rows()) + " feature rows but graph has " +
                      std::to_string(n) + " nodes");
    }
  }
  if (labels_path) {
    ds.labels = read_labels_csv(*labels_path);
    if (static_cast<NodeId>(ds.labels->size()) != n) {
      throw DataError(labels_path->string() + ": " + std::to_string(ds.labels->size()) + " labels but graph has " +
                      std::to_string(n) + " nodes");
    }
  }
  return ds;
}

/// Writes kept.txt (original ids), subgraph.edges (relabeled), idmap.txt
/// ("new original" pairs), features.csv and labels.csv when present.
inline void write_sample(const SampleResult& result, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create directory '" + dir.string() + "': " + ec.message());
  std::string kept;
  std::string idmap;
  const auto ids = result.subgraph.original_ids();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    kept += std::to_string(ids[i]) + "\n";
    idmap += std::to_string(i) + " " + std::to_string(ids[i]) + "\n";
  }
  write_text(dir / "kept.txt", kept);
  write_text(dir / "idmap.txt", idmap);
  write_edge_list(result.subgraph, dir / "subgraph.edges");
  if (result.features.size() > 0) write_features_csv(result.features, dir / "features.csv");
  if (result.labels) write_labels_csv(*result.labels, dir / "labels.csv");
}

inline std::vector<NodeId> read_kept(const fs::path& path) {
  const auto text = read_text(path);
  const auto lines = detail::lines_of(text);
  std::vector<NodeId> out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto v = detail::parse_number<NodeId>(detail::trim(lines[i]));
    if (!v || *v < 0) throw DataError(detail::where(path.string(), i + 1) + ": invalid node id");
    out.push_back(*v);
  }
  return out;
}

struct MetricsReport {
  std::string dataset;
  std::string method;
  double gamma = 1.0;
  std::uint64_t seed = 0;
  std::int64_t nodes = 0;
  std::int64_t edges = 0;
  std::optional<double> homophily;
  double trace = 0.0;
  double adjusted_trace = 0.0;
  std::int64_t components = 0;
  std::int64_t laplacian_rank = 0;
  std::optional<double> trace_bound;
  std::optional<bool> bound_satisfied;
  std::optional<double> accuracy;
  /// Phases executed to produce this report, in order.
  std::vector<std::string> phases;
  /// Wall-clock seconds per phase. Omitted from the file when empty.
  std::vector<std::pair<std::string, double>> timings;

  void validate() const {
    if (trace_bound && bound_satisfied && !*bound_satisfied) {
      throw NumericalError("trace bound violated: tr(L) = " + format_double(trace) + " < " + format_double(*trace_bound));
    }
  }

  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

/// Fixed key order, two-space indent, 17 significant digits.
inline std::string serialize_report(const MetricsReport& r) {
  r.validate();
  const auto str = [](const std::string& s) { return nlohmann::json(s).dump(); };
  const auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string("null"); };
  std::string out = "{\n";
  out += "  \"dataset\": " + str(r.dataset) + ",\n";
  out += "  \"method\": " + str(r.method) + ",\n";
  out += "  \"gamma\": " + format_double(r.gamma) + ",\n";
  out += "  \"seed\": " + std::to_string(r.seed) + ",\n";
  out += "  \"nodes\": " + std::to_string(r.nodes) + ",\n";
  out += "  \"edges\": " + std::to_string(r.edges) + ",\n";
  out += "  \"homophily\": " + opt(r.homophily) + ",\n";
  out += "  \"trace\": " + format_double(r.trace) + ",\n";
  out += "  \"adjusted_trace\": " + format_double(r.adjusted_trace) + ",\n";
  out += "  \"components\": " + std::to_string(r.components) + ",\n";
  out += "  \"laplacian_rank\": " + std::to_string(r.laplacian_rank) + ",\n";
  out += "  \"trace_bound\": " + opt(r.trace_bound) + ",\n";
  out += "  \"bound_satisfied\": " + std::string(r.bound_satisfied ? (*r.bound_satisfied ? "true" : "false") : "null") + ",\n";
  out += "  \"accuracy\": " + opt(r.accuracy) + ",\n";
  out += "  \"phases\": [";
  for (std::size_t i = 0; i < r.phases.size(); ++i) out += (i ? ", " : "") + str(r.phases[i]);
  out += "]";
  if (!r.timings.empty()) {
    out += ",\n  \"timings\": {";
    for (std::size_t i = 0; i < r.timings.size(); ++i) {
      out += (i ? ", " : "") + str(r.timings[i].first) + ": " + format_double(r.timings[i].second);
    }
    out += "}";
  }
  out += "\n}\n";
  return out;
}

inline MetricsReport parse_report(std::string_view text, std::string_view source = "<report>") {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(std::string(source) + ": " + e.what());
  }
  const auto fail = [&](const std::string& key, const std::string& why) {
    return DataError(std::string(source) + ": field '" + key + "' " + why);
  };
  const auto need = [&](const char* key) -> const nlohmann::json& {
    if (!j.is_object() || !j.contains(key)) throw fail(key, "is missing");
    return j.at(key);
  };
  const auto number = [&](const char* key) {
    const auto& v = need(key);
    if (!v.is_number()) throw fail(key, "must be a number");
    return v.get<double>();
  };
  const auto integer = [&](const char* key) {
    const auto& v = need(key);
    if (!v.is_number_integer()) throw fail(key, "must be an integer");
    return v.get<std::int64_t>();
  };
  const auto opt_number = [&](const char* key) -> std::optional<double> {
    const auto& v = need(key);
    if (v.is_null()) return std::nullopt;
    if (!v.is_number()) throw fail(key, "must be a number or null");
    return v.get<double>();
  };
  const auto string = [&](const char* key) {
    const auto& v = need(key);
    if (!v.is_string()) throw fail(key, "must be a string");
    return v.get<std::string>();
  };

  MetricsReport r;
  r.dataset = string("dataset");
  r.method = string("method");
  r.gamma = number("gamma");
  {
    const auto& v = need("seed");
    if (!v.is_number_unsigned()) throw fail("seed", "must be a nonnegative integer");
    r.seed = v.get<std::uint64_t>();
  }
  r.nodes = integer("nodes");
  r.edges = integer("edges");
  r.homophily = opt_number("homophily");
  r.trace = number("trace");
  r.adjusted_trace = number("adjusted_trace");
  r.components = integer("components");
  r.laplacian_rank = integer("laplacian_rank");
  r.trace_bound = opt_number("trace_bound");
  {
    const auto& v = need("bound_satisfied");
    if (v.is_boolean()) r.bound_satisfied = v.get<bool>();
    else if (!v.is_null()) throw fail("bound_satisfied", "must be a boolean or null");
  }
  r.accuracy = opt_number("accuracy");
  {
    const auto& v = need("phases");
    if (!v.is_array()) throw fail("phases", "must be an array");
    for (const auto& p : v) {
      if (!p.is_string()) throw fail("phases", "must contain strings");
      r.phases.push_back(p.get<std::string>());
    }
  }
  if (j.contains("timings")) {
    const auto& v = j.at("timings");
    if (!v.is_object()) throw fail("timings", "must be an object");
    // nlohmann objects iterate in key order; keep phase order instead.
    for (const auto& phase : r.phases) {
      if (v.contains(phase)) r.timings.emplace_back(phase, v.at(phase).get<double>());
    }
    for (const auto& [key, value] : v.items()) {
      bool seen = false;
      for (const auto& t : r.timings) seen = seen || t.first == key;
      if (!seen) r.timings.emplace_back(key, value.get<double>());
    }
  }
  r.validate();
  return r;
}

inline void write_report(const MetricsReport& r, const fs::path& path) { write_text(path, serialize_report(r)); }

inline MetricsReport read_report(const fs::path& path) { return parse_report(read_text(path), path.string()); }

}  // namespace homsample::io
