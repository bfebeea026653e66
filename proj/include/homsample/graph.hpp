#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "homsample/errors.hpp"

namespace homsample {

using NodeId = std::int64_t;
using Edge = std::pair<NodeId, NodeId>;

/// Immutable undirected graph in CSR form. Both directions of every edge are
/// stored, neighbor lists are sorted, and there are no self-loops or
/// duplicates. Each node also carries the id it had in the root graph it was
/// built from, so subgraphs can be written back in original ids.
class Graph {
 public:
  Graph() : offsets_(1, 0) {}

  NodeId num_nodes() const { return static_cast<NodeId>(offsets_.size()) - 1; }

  /// Undirected edge count m.
  std::size_t num_edges() const { return targets_.size() / 2; }

  std::size_t degree(NodeId u) const { return offsets_[u + 1] - offsets_[u]; }

  std::span<const NodeId> neighbors(NodeId u) const {
    return {targets_.data() + offsets_[u], degree(u)};
  }

  bool has_edge(NodeId u, NodeId v) const {
    const auto nb = neighbors(u);
    return std::binary_search(nb.begin(), nb.end(), v);
  }

  std::span<const std::size_t> offsets() const { return offsets_; }
  std::span<const NodeId> targets() const { return targets_; }

  NodeId original_id(NodeId u) const { return original_ids_[u]; }
  std::span<const NodeId> original_ids() const { return original_ids_; }

  /// Calls f(u, v) once per undirected edge, with u < v, in CSR order.
  template <class F>
  void for_each_edge(F&& f) const {
    const NodeId n = num_nodes();
    for (NodeId u = 0; u < n; ++u) {
      for (std::size_t e = offsets_[u]; e < offsets_[u + 1]; ++e) {
        if (targets_[e] > u) f(u, targets_[e]);
      }
    }
  }

  /// Undirected edges (u < v) in lexicographic order.
  std::vector<Edge> edge_list() const {
    std::vector<Edge> out;
    out.reserve(num_edges());
    for_each_edge([&](NodeId u, NodeId v) { out.emplace_back(u, v); });
    return out;
  }

  friend bool operator==(const Graph&, const Graph&) = default;

 private:
  friend class GraphAccess;

  std::vector<std::size_t> offsets_;
  std::vector<NodeId> targets_;
  std::vector<NodeId> original_ids_;
};

/// Internal constructor access for derived graphs.
class GraphAccess {
 public:
  static Graph make(std::vector<std::size_t> offsets, std::vector<NodeId> targets, std::vector<NodeId> original_ids) {
    Graph g;
    g.offsets_ = std::move(offsets);
    g.targets_ = std::move(targets);
    g.original_ids_ = std::move(original_ids);
    return g;
  }
};

/// Sorted set of distinct node indices drawn from [0, universe), plus the
/// inverse map old index -> position in the set (-1 when absent).
class NodeIndexSet {
 public:
  NodeIndexSet() = default;

  NodeIndexSet(std::vector<NodeId> indices, NodeId universe) : universe_(universe) {
    std::sort(indices.begin(), indices.end());
    position_.assign(static_cast<std::size_t>(universe), -1);
    for (std::size_t i = 0; i < indices.size(); ++i) {
      const NodeId v = indices[i];
      if (v < 0 || v >= universe) {
        throw UsageError("node index " + std::to_string(v) + " out of range [0, " +
                         std::to_string(universe) + ")");
      }
      if (i > 0 && indices[i - 1] == v) {
        throw UsageError("duplicate node index " + std::to_string(v));
      }
      position_[v] = static_cast<NodeId>(i);
    }
    indices_ = std::move(indices);
  }

  std::size_t size() const { return indices_.size(); }
  bool empty() const { return indices_.empty(); }
  NodeId universe() const { return universe_; }
  std::span<const NodeId> indices() const { return indices_; }
  NodeId operator[](std::size_t i) const { return indices_[i]; }
  bool contains(NodeId v) const { return v >= 0 && v < universe_ && position_[v] >= 0; }
  NodeId position_of(NodeId v) const { return position_[v]; }

  auto begin() const { return indices_.begin(); }
  auto end() const { return indices_.end(); }

 private:
  std::vector<NodeId> indices_;
  std::vector<NodeId> position_;
  NodeId universe_ = 0;
};

/// Builds a simple undirected graph: edges are symmetrized, duplicates and
/// self-loops dropped. Node count is declared_n when given, else max id + 1;
/// ids below that which appear in no edge become isolated nodes.
inline Graph build_graph(std::span<const Edge> edges, std::optional<NodeId> declared_n = std::nullopt) {
  if (edges.empty() && !declared_n) throw DataError("empty graph");
  NodeId max_id = -1;
  for (const auto& [u, v] : edges) {
    if (u < 0 || v < 0) {
      throw DataError("negative node id in edge (" + std::to_string(u) + ", " + std::to_string(v) + ")");
    }
    max_id = std::max({max_id, u, v});
  }
  NodeId n = max_id + 1;
  if (declared_n) {
    if (*declared_n < 0) throw DataError("negative node count");
    if (*declared_n < n) {
      throw DataError("declared node count " + std::to_string(*declared_n) + " but edge references node " +
                      std::to_string(max_id));
    }
    n = *declared_n;
  }

  std::vector<Edge> canon;
  canon.reserve(edges.size());
  for (const auto& [u, v] : edges) {
    if (u != v) canon.emplace_back(std::min(u, v), std::max(u, v));
  }
  std::sort(canon.begin(), canon.end());
  canon.erase(std::unique(canon.begin(), canon.end()), canon.end());

  std::vector<std::size_t> offsets(static_cast<std::size_t>(n) + 1, 0);
  for (const auto& [u, v] : canon) {
    ++offsets[u + 1];
    ++offsets[v + 1];
  }
  std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
  std::vector<NodeId> targets(2 * canon.size());
  std::vector<std::size_t> cursor(offsets.begin(), offsets.end() - 1);
  // Lexicographic pair order leaves every neighbor list sorted.
  for (const auto& [u, v] : canon) {
    targets[cursor[u]++] = v;
    targets[cursor[v]++] = u;
  }
  std::vector<NodeId> original(static_cast<std::size_t>(n));
  std::iota(original.begin(), original.end(), NodeId{0});
  return GraphAccess::make(std::move(offsets), std::move(targets), std::move(original));
}

inline Graph build_graph(const std::vector<Edge>& edges, std::optional<NodeId> declared_n = std::nullopt) {
  return build_graph(std::span<const Edge>(edges), declared_n);
}

/// tr(L) = sum of degrees = 2m.
inline double laplacian_trace(const Graph& g) { return static_cast<double>(g.targets().size()); }

/// tr(L) / n, the average degree.
inline double adjusted_trace(const Graph& g) {
  if (g.num_nodes() == 0) throw UsageError("adjusted trace of an empty graph");
  return laplacian_trace(g) / static_cast<double>(g.num_nodes());
}

struct Components {
  NodeId count = 0;
  /// Component ids are assigned in order of each component's smallest node.
  std::vector<NodeId> labels;
};

inline Components connected_components(const Graph& g) {
  const NodeId n = g.num_nodes();
  Components out;
  out.labels.assign(static_cast<std::size_t>(n), -1);
  std::vector<NodeId> stack;
  for (NodeId s = 0; s < n; ++s) {
    if (out.labels[s] >= 0) continue;
    const NodeId id = out.count++;
    out.labels[s] = id;
    stack.push_back(s);
    while (!stack.empty()) {
      const NodeId u = stack.back();
      stack.pop_back();
      for (NodeId v : g.neighbors(u)) {
        if (out.labels[v] < 0) {
          out.labels[v] = id;
          stack.push_back(v);
        }
      }
    }
  }
  return out;
}

/// rank(L) = n - (number of connected components), exactly.
inline NodeId laplacian_rank(const Graph& g) { return g.num_nodes() - connected_components(g).count; }

/// Node-induced subgraph on `keep`, relabeled to 0..|keep|-1 in index order.
inline Graph induced_subgraph(const Graph& g, const NodeIndexSet& keep) {
  if (keep.empty()) throw UsageError("induced subgraph of an empty node set");
  if (keep.universe() != g.num_nodes()) {
    throw UsageError("node set universe " + std::to_string(keep.universe()) + " does not match graph with " +
                     std::to_string(g.num_nodes()) + " nodes");
  }
  std::vector<std::size_t> offsets(keep.size() + 1, 0);
  std::vector<NodeId> targets;
  std::vector<NodeId> original(keep.size());
  for (std::size_t i = 0; i < keep.size(); ++i) {
    const NodeId u = keep[i];
    original[i] = g.original_id(u);
    for (NodeId v : g.neighbors(u)) {
      const NodeId pos = keep.position_of(v);
      if (pos >= 0) targets.push_back(pos);
    }
    offsets[i + 1] = targets.size();
  }
  return GraphAccess::make(std::move(offsets), std::move(targets), std::move(original));
}

}  // namespace homsample
