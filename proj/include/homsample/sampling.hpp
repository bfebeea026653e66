#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "homsample/errors.hpp"
#include "homsample/features.hpp"
#include "homsample/graph.hpp"
#include "homsample/random.hpp"

namespace homsample {

enum class SampleMethod { homophily, random, degree_greedy };

inline std::string_view to_string(SampleMethod m) {
  switch (m) {
    case SampleMethod::homophily: return "homophily";
    case SampleMethod::random: return "random";
    case SampleMethod::degree_greedy: return "degree_greedy";
  }
  return "unknown";
}

inline SampleMethod parse_sample_method(std::string_view name) {
  if (name == "homophily") return SampleMethod::homophily;
  if (name == "random") return SampleMethod::random;
  if (name == "degree_greedy" || name == "degree") return SampleMethod::degree_greedy;
  throw UsageError("unknown sampling method '" + std::string(name) + "'");
}

struct SampleSpec {
  /// Keep rate gamma in [0, 1].
  double gamma = 1.0;
  SampleMethod method = SampleMethod::homophily;
  /// Used by the random method only.
  std::uint64_t seed = 0;
  /// Score rows of the raw feature matrix instead of the normalized one.
  bool use_raw_scores = false;
};

struct SampleResult {
  NodeIndexSet kept;
  Graph subgraph;
  /// Raw features of the kept rows; consumers normalize on their own.
  FeatureMatrix features;
  std::optional<Labels> labels;
};

/// Deletion budget floor((1 - gamma) n). The 1e-9 slack keeps decimal rates
/// such as 0.9 from losing a node to rounding in 1 - gamma.
inline NodeId deletion_budget(double gamma, NodeId n) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw UsageError("keep rate gamma must lie in [0, 1], got " + std::to_string(gamma));
  const auto budget = static_cast<NodeId>(std::floor((1.0 - gamma) * static_cast<double>(n) + 1e-9));
  return std::min(budget, n);
}

inline NodeId keep_count(double gamma, NodeId n) {
  const NodeId keep = n - deletion_budget(gamma, n);
  if (keep < 1) throw UsageError("empty sample: keep rate " + std::to_string(gamma) + " retains no nodes");
  return keep;
}

namespace detail {

inline void check_inputs(const Graph& g, const FeatureMatrix* x, const Labels* labels) {
  if (x != nullptr && x->rows() != g.num_nodes()) {
    throw UsageError("feature rows (" + std::to_string(x->rows()) + ") do not match graph nodes (" +
                     std::to_string(g.num_nodes()) + ")");
  }
  if (labels != nullptr && static_cast<NodeId>(labels->size()) != g.num_nodes()) {
    throw UsageError("label count (" + std::to_string(labels->size()) + ") does not match graph nodes (" +
                     std::to_string(g.num_nodes()) + ")");
  }
}

inline SampleResult assemble(const Graph& g, const FeatureMatrix* x, const Labels* labels, NodeIndexSet kept) {
  SampleResult out;
  out.subgraph = induced_subgraph(g, kept);
  if (x != nullptr) {
    out.features.resize(static_cast<Eigen::Index>(kept.size()), x->cols());
    for (std::size_t i = 0; i < kept.size(); ++i) out.features.row(static_cast<Eigen::Index>(i)) = x->row(kept[i]);
  }
  if (labels != nullptr) {
    Labels restricted(kept.size());
    for (std::size_t i = 0; i < kept.size(); ++i) restricted[i] = (*labels)[kept[i]];
    out.labels = std::move(restricted);
  }
  out.kept = std::move(kept);
  return out;
}

}  // namespace detail

/// Indices kept by the homophily heuristic given precomputed scores: the
/// floor((1 - gamma) n) highest-scoring nodes are removed. Among equal scores
/// the larger index is removed first. One selection pass, no rescoring.
inline std::vector<NodeId> lowest_score_nodes(std::span<const double> scores, double gamma) {
  const auto n = static_cast<NodeId>(scores.size());
  const NodeId keep = keep_count(gamma, n);
  const NodeId removed = n - keep;
  std::vector<NodeId> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), NodeId{0});
  // Removal order: score descending, then index descending.
  const auto removed_first = [&](NodeId a, NodeId b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a > b;
  };
  if (removed > 0) std::nth_element(order.begin(), order.begin() + (removed - 1), order.end(), removed_first);
  std::vector<NodeId> kept(order.begin() + removed, order.end());
  std::sort(kept.begin(), kept.end());
  return kept;
}

/// Feature-homophily node sampling: score every node once by the squared norm
/// of its normalized feature row and keep the lowest-scoring nodes.
inline SampleResult sample_homophily(const Graph& g, const FeatureMatrix& x, const SampleSpec& spec,
                                     const Labels* labels = nullptr) {
  detail::check_inputs(g, &x, labels);
  const Vector scores = spec.use_raw_scores ? node_scores(x) : node_scores(normalize_features(x));
  if (!scores.allFinite()) throw NumericalError("non-finite node scores");
  auto kept = lowest_score_nodes(std::span<const double>(scores.data(), static_cast<std::size_t>(scores.size())),
                                 spec.gamma);
  return detail::assemble(g, &x, labels, NodeIndexSet(std::move(kept), g.num_nodes()));
}

/// Uniform sampling without replacement; reproducible from spec.seed.
inline std::vector<NodeId> random_keep_set(NodeId n, double gamma, std::uint64_t seed) {
  const NodeId keep = keep_count(gamma, n);
  std::vector<NodeId> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), NodeId{0});
  CounterRng rng(seed, 0x5a3e);
  // Partial Fisher-Yates: the first `keep` slots end up a uniform subset.
  for (NodeId i = 0; i < keep; ++i) {
    const auto j = i + static_cast<NodeId>(rng.below(static_cast<std::uint64_t>(n - i)));
    std::swap(perm[i], perm[j]);
  }
  perm.resize(static_cast<std::size_t>(keep));
  std::sort(perm.begin(), perm.end());
  return perm;
}

inline SampleResult sample_random(const Graph& g, const FeatureMatrix* x, const SampleSpec& spec,
                                  const Labels* labels = nullptr) {
  detail::check_inputs(g, x, labels);
  return detail::assemble(g, x, labels, NodeIndexSet(random_keep_set(g.num_nodes(), spec.gamma, spec.seed), g.num_nodes()));
}

/// Greedy trace maximization: repeatedly delete a node of minimum current
/// degree (smaller index first on ties), updating neighbor degrees.
inline std::vector<NodeId> degree_greedy_keep_set(const Graph& g, double gamma) {
  const NodeId n = g.num_nodes();
  const NodeId removed = n - keep_count(gamma, n);
  std::vector<std::size_t> degree(static_cast<std::size_t>(n));
  std::set<std::pair<std::size_t, NodeId>> queue;
  for (NodeId u = 0; u < n; ++u) {
    degree[u] = g.degree(u);
    queue.emplace(degree[u], u);
  }
  std::vector<bool> alive(static_cast<std::size_t>(n), true);
  for (NodeId step = 0; step < removed; ++step) {
    const NodeId u = queue.begin()->second;
    queue.erase(queue.begin());
    alive[u] = false;
    for (NodeId v : g.neighbors(u)) {
      if (!alive[v]) continue;
      queue.erase({degree[v], v});
      --degree[v];
      queue.emplace(degree[v], v);
    }
  }
  std::vector<NodeId> kept;
  kept.reserve(static_cast<std::size_t>(n - removed));
  for (NodeId u = 0; u < n; ++u) {
    if (alive[u]) kept.push_back(u);
  }
  return kept;
}

inline SampleResult sample_degree_greedy(const Graph& g, const FeatureMatrix* x, const SampleSpec& spec,
                                         const Labels* labels = nullptr) {
  detail::check_inputs(g, x, labels);
  return detail::assemble(g, x, labels, NodeIndexSet(degree_greedy_keep_set(g, spec.gamma), g.num_nodes()));
}

/// Dispatches on spec.method. Features are required for the homophily method.
inline SampleResult sample(const Graph& g, const FeatureMatrix* x, const SampleSpec& spec,
                           const Labels* labels = nullptr) {
  switch (spec.method) {
    case SampleMethod::homophily:
      if (x == nullptr) throw UsageError("homophily sampling requires node features");
      return sample_homophily(g, *x, spec, labels);
    case SampleMethod::random: return sample_random(g, x, spec, labels);
    case SampleMethod::degree_greedy: return sample_degree_greedy(g, x, spec, labels);
  }
  throw UsageError("unknown sampling method");
}

}  // namespace homsample
