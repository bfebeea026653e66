#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "homsample/errors.hpp"
#include "homsample/features.hpp"
#include "homsample/graph.hpp"
#include "homsample/random.hpp"

namespace homsample {

/// Piecewise-constant graphon W on [0,1]^2: [0,1] is cut into consecutive
/// intervals of the given widths and W(u, v) = probabilities[a][b] for u in
/// interval a, v in interval b. Constant graphons and uniform grids are the
/// one-block and equal-width cases.
struct GraphonSpec {
  std::vector<double> widths{1.0};
  std::vector<std::vector<double>> probabilities{{0.0}};
  NodeId nodes = 100;
  int feature_dim = 16;
  /// Standard deviation tau of the isotropic feature noise.
  double noise = 0.0;
  /// Magnitude of the block one-hot embedding.
  double signal = 1.0;
  std::uint64_t seed = 0;

  static GraphonSpec constant(double p, NodeId n) {
    GraphonSpec s;
    s.probabilities = {{p}};
    s.nodes = n;
    return s;
  }

  /// Assortative block model: `intra` on the diagonal, `inter` elsewhere.
  static GraphonSpec blocks(std::vector<double> widths, double intra, double inter, NodeId n) {
    GraphonSpec s;
    const std::size_t k = widths.size();
    s.widths = std::move(widths);
    s.probabilities.assign(k, std::vector<double>(k, inter));
    for (std::size_t a = 0; a < k; ++a) s.probabilities[a][a] = intra;
    s.nodes = n;
    return s;
  }

  /// Equal-width grid of cell values.
  static GraphonSpec grid(std::vector<std::vector<double>> cells, NodeId n) {
    GraphonSpec s;
    s.widths.assign(cells.size(), 1.0 / static_cast<double>(cells.size()));
    s.probabilities = std::move(cells);
    s.nodes = n;
    return s;
  }

  int num_blocks() const { return static_cast<int>(widths.size()); }

  void validate() const {
    const std::size_t k = widths.size();
    if (k == 0) throw UsageError("graphon needs at least one block");
    if (probabilities.size() != k) throw UsageError("graphon probability matrix must be k x k");
    double total = 0.0;
    for (double w : widths) {
      if (!(w > 0.0)) throw UsageError("graphon block widths must be positive");
      total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) throw UsageError("graphon block widths must sum to 1");
    for (std::size_t a = 0; a < k; ++a) {
      if (probabilities[a].size() != k) throw UsageError("graphon probability matrix must be k x k");
      for (std::size_t b = 0; b < k; ++b) {
        const double p = probabilities[a][b];
        if (!(p >= 0.0 && p <= 1.0)) throw UsageError("graphon probabilities must lie in [0, 1]");
        if (p != probabilities[b][a]) throw UsageError("graphon probability matrix must be symmetric");
      }
    }
    if (noise < 0.0) throw UsageError("feature noise must be nonnegative");
  }

  int block_of(double u) const {
    double edge = 0.0;
    for (int a = 0; a + 1 < num_blocks(); ++a) {
      edge += widths[static_cast<std::size_t>(a)];
      if (u < edge) return a;
    }
    return num_blocks() - 1;
  }

  double operator()(double u, double v) const {
    return probabilities[static_cast<std::size_t>(block_of(u))][static_cast<std::size_t>(block_of(v))];
  }
};

struct GraphonSample {
  Graph graph;
  /// Latent positions u_i.
  std::vector<double> positions;
  /// Block of each u_i; doubles as the class label.
  Labels blocks;
};

namespace detail {

/// Geometric skip length for Bernoulli(p) trials: failures before the next success.
inline std::uint64_t geometric_skip(CounterRng& rng, double log_q) {
  const double skip = std::floor(std::log(rng.uniform_positive()) / log_q);
  return skip < 0x1.0p62 ? static_cast<std::uint64_t>(skip) : std::uint64_t{1} << 62;
}

/// Visits each index in [0, count) independently with probability p.
template <class F>
void bernoulli_indices(CounterRng& rng, std::uint64_t count, double p, F&& visit) {
  if (p <= 0.0 || count == 0) return;
  if (p >= 1.0) {
    for (std::uint64_t t = 0; t < count; ++t) visit(t);
    return;
  }
  const double log_q = std::log1p(-p);
  std::uint64_t t = geometric_skip(rng, log_q);
  while (t < count) {
    visit(t);
    const std::uint64_t skip = geometric_skip(rng, log_q);
    if (skip >= count - t) break;
    t += skip + 1;
  }
}

}  // namespace detail

/// Draws u_i ~ U[0,1] i.i.d. and includes each pair {i, j} independently with
/// probability W(u_i, u_j). Runs in O(n + m) per block pair via geometric skipping.
inline GraphonSample sample_graphon_graph(const GraphonSpec& spec) {
  spec.validate();
  if (spec.nodes < 2) throw UsageError("graphon sample needs at least 2 nodes");
  const NodeId n = spec.nodes;
  GraphonSample out;
  CounterRng pos_rng(spec.seed, 0);
  out.positions.resize(static_cast<std::size_t>(n));
  out.blocks.resize(static_cast<std::size_t>(n));
  std::vector<std::vector<NodeId>> members(static_cast<std::size_t>(spec.num_blocks()));
  for (NodeId i = 0; i < n; ++i) {
    out.positions[i] = pos_rng.uniform();
    out.blocks[i] = spec.block_of(out.positions[i]);
    members[static_cast<std::size_t>(out.blocks[i])].push_back(i);
  }

  CounterRng edge_rng(spec.seed, 1);
  std::vector<Edge> edges;
  const int k = spec.num_blocks();
  for (int a = 0; a < k; ++a) {
    const auto& ma = members[static_cast<std::size_t>(a)];
    for (int b = a; b < k; ++b) {
      const auto& mb = members[static_cast<std::size_t>(b)];
      const double p = spec.probabilities[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
      if (a == b) {
        // Pair index t enumerates (i, j), j < i, row by row.
        const std::uint64_t s = ma.size();
        std::uint64_t row = 1;
        std::uint64_t row_start = 0;
        detail::bernoulli_indices(edge_rng, s < 2 ? 0 : s * (s - 1) / 2, p, [&](std::uint64_t t) {
          while (t >= row_start + row) {
            row_start += row;
            ++row;
          }
          edges.emplace_back(ma[row], ma[t - row_start]);
        });
      } else {
        const std::uint64_t cols = mb.size();
        detail::bernoulli_indices(edge_rng, ma.size() * cols, p,
                                  [&](std::uint64_t t) { edges.emplace_back(ma[t / cols], mb[t % cols]); });
      }
    }
  }
  out.graph = build_graph(edges, n);
  return out;
}

/// Node features driven by the latent block: signal * e_(block) plus
/// N(0, noise^2) in every coordinate. Independent of the realized edges.
inline FeatureMatrix homophilic_features(const GraphonSample& sample, const GraphonSpec& spec) {
  spec.validate();
  if (spec.feature_dim < spec.num_blocks()) {
    throw UsageError("feature dimension " + std::to_string(spec.feature_dim) + " is smaller than the block count " +
                     std::to_string(spec.num_blocks()));
  }
  const auto n = static_cast<Eigen::Index>(sample.blocks.size());
  FeatureMatrix x(n, spec.feature_dim);
  CounterRng rng(spec.seed, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = spec.noise > 0.0 ? spec.noise * rng.normal() : 0.0;
    x(i, sample.blocks[i]) += spec.signal;
  }
  return x;
}

struct SyntheticDataset {
  Graph graph;
  FeatureMatrix features;
  Labels labels;
  std::vector<double> positions;
};

inline SyntheticDataset generate_dataset(const GraphonSpec& spec) {
  auto sample = sample_graphon_graph(spec);
  SyntheticDataset ds;
  ds.features = homophilic_features(sample, spec);
  ds.graph = std::move(sample.graph);
  ds.labels = std::move(sample.blocks);
  ds.positions = std::move(sample.positions);
  return ds;
}

}  // namespace homsample
