#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "homsample/errors.hpp"
#include "homsample/features.hpp"
#include "homsample/graph.hpp"
#include "homsample/random.hpp"

namespace homsample::gnn {

enum class ShiftChoice { adjacency, laplacian, normalized_adjacency };
enum class Activation { relu, sigmoid };

inline ShiftChoice parse_shift(std::string_view name) {
  if (name == "adjacency" || name == "A") return ShiftChoice::adjacency;
  if (name == "laplacian" || name == "L") return ShiftChoice::laplacian;
  if (name == "normalized" || name == "normalized_adjacency" || name == "gcn") return ShiftChoice::normalized_adjacency;
  throw UsageError("unknown shift operator '" + std::string(name) + "'");
}

inline std::string_view to_string(ShiftChoice s) {
  switch (s) {
    case ShiftChoice::adjacency: return "adjacency";
    case ShiftChoice::laplacian: return "laplacian";
    case ShiftChoice::normalized_adjacency: return "normalized";
  }
  return "unknown";
}

inline Activation parse_activation(std::string_view name) {
  if (name == "relu") return Activation::relu;
  if (name == "sigmoid") return Activation::sigmoid;
  throw UsageError("unknown activation '" + std::string(name) + "'");
}

struct GnnConfig {
  int layers = 2;
  /// Filter taps K per layer (powers S^0 .. S^(K-1)).
  int taps = 2;
  /// Widths of the layers-1 hidden layers. A single entry is reused for all.
  std::vector<int> hidden = {64};
  ShiftChoice shift = ShiftChoice::normalized_adjacency;
  Activation activation = Activation::relu;
  int epochs = 200;
  double learning_rate = 1e-3;
  double weight_decay = 1e-4;
  std::uint64_t seed = 0;

  /// Layer widths d_0 = input, ..., d_L = classes.
  std::vector<int> layer_dims(int input_dim, int classes) const {
    if (layers < 1) throw UsageError("GNN needs at least one layer");
    if (taps < 1) throw UsageError("GNN needs at least one filter tap");
    if (input_dim < 1 || classes < 1) throw UsageError("input width and class count must be positive");
    if (layers > 1 && hidden.empty()) throw UsageError("hidden widths missing");
    if (hidden.size() > 1 && static_cast<int>(hidden.size()) != layers - 1) {
      throw UsageError("expected " + std::to_string(layers - 1) + " hidden widths, got " + std::to_string(hidden.size()));
    }
    std::vector<int> dims{input_dim};
    for (int l = 1; l < layers; ++l) {
      const int w = hidden.size() == 1 ? hidden[0] : hidden[static_cast<std::size_t>(l - 1)];
      if (w < 1) throw UsageError("hidden widths must be positive");
      dims.push_back(w);
    }
    dims.push_back(classes);
    return dims;
  }
};

/// Filter taps H[l][k], each d_(l) x d_(l+1).
struct GnnModel {
  std::vector<std::vector<Matrix>> weights;

  int num_layers() const { return static_cast<int>(weights.size()); }
  int num_taps() const { return weights.empty() ? 0 : static_cast<int>(weights.front().size()); }
  Eigen::Index input_dim() const { return weights.front().front().rows(); }
  Eigen::Index output_dim() const { return weights.back().front().cols(); }

  bool all_finite() const {
    for (const auto& layer : weights) {
      for (const auto& h : layer) {
        if (!h.allFinite()) return false;
      }
    }
    return true;
  }

  friend bool operator==(const GnnModel& a, const GnnModel& b) {
    if (a.weights.size() != b.weights.size()) return false;
    for (std::size_t l = 0; l < a.weights.size(); ++l) {
      if (a.weights[l].size() != b.weights[l].size()) return false;
      for (std::size_t k = 0; k < a.weights[l].size(); ++k) {
        if (a.weights[l][k].rows() != b.weights[l][k].rows() || a.weights[l][k].cols() != b.weights[l][k].cols() ||
            a.weights[l][k] != b.weights[l][k]) {
          return false;
        }
      }
    }
    return true;
  }
};

using SparseShift = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Sparse shift operator of g. The normalized choice is the GCN propagation
/// matrix D^-1/2 (A + I) D^-1/2 with D the degrees of A + I.
inline SparseShift build_shift(const Graph& g, ShiftChoice choice) {
  const NodeId n = g.num_nodes();
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(g.targets().size() + static_cast<std::size_t>(n));
  for (NodeId u = 0; u < n; ++u) {
    const auto du = static_cast<double>(g.degree(u));
    switch (choice) {
      case ShiftChoice::adjacency:
        for (NodeId v : g.neighbors(u)) entries.emplace_back(u, v, 1.0);
        break;
      case ShiftChoice::laplacian:
        if (du > 0) entries.emplace_back(u, u, du);
        for (NodeId v : g.neighbors(u)) entries.emplace_back(u, v, -1.0);
        break;
      case ShiftChoice::normalized_adjacency: {
        const double iu = 1.0 / std::sqrt(du + 1.0);
        entries.emplace_back(u, u, iu * iu);
        for (NodeId v : g.neighbors(u)) {
          entries.emplace_back(u, v, iu / std::sqrt(static_cast<double>(g.degree(v)) + 1.0));
        }
        break;
      }
    }
  }
  SparseShift s(n, n);
  s.setFromTriplets(entries.begin(), entries.end());
  return s;
}

/// Y = sum_k S^k X H_k, by repeated sparse shifts (S^k is never formed).
inline Matrix conv_filterbank(const SparseShift& s, const Matrix& x, std::span<const Matrix> taps) {
  if (taps.empty()) throw UsageError("filterbank needs at least one tap");
  if (x.rows() != s.rows()) throw UsageError("signal rows do not match shift operator");
  const Eigen::Index out = taps.front().cols();
  for (const auto& h : taps) {
    if (h.rows() != x.cols() || h.cols() != out) throw UsageError("filter tap shape mismatch");
  }
  Matrix y = x * taps.front();
  Matrix z = x;
  for (std::size_t k = 1; k < taps.size(); ++k) {
    z = s * z;
    y.noalias() += z * taps[k];
  }
  return y;
}

inline Matrix conv_filterbank(const Graph& g, ShiftChoice choice, const Matrix& x, std::span<const Matrix> taps) {
  return conv_filterbank(build_shift(g, choice), x, taps);
}

/// Fan-in scaled uniform init: U(-b, b), b = 1 / sqrt(K * d_in).
inline GnnModel init_model(const GnnConfig& cfg, int input_dim, int classes) {
  const auto dims = cfg.layer_dims(input_dim, classes);
  CounterRng rng(cfg.seed, 0x1417);
  GnnModel model;
  for (int l = 0; l < cfg.layers; ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(cfg.taps) * dims[l]);
    std::vector<Matrix> layer;
    for (int k = 0; k < cfg.taps; ++k) {
      Matrix h(dims[l], dims[l + 1]);
      for (Eigen::Index i = 0; i < h.size(); ++i) h.data()[i] = bound * (2.0 * rng.uniform() - 1.0);
      layer.push_back(std::move(h));
    }
    model.weights.push_back(std::move(layer));
  }
  return model;
}

namespace detail {

inline Matrix activate(const Matrix& pre, Activation act) {
  if (act == Activation::relu) return pre.cwiseMax(0.0);
  return (1.0 / (1.0 + (-pre.array()).exp())).matrix();
}

/// d act / d pre, expressed through the pre-activation and the output.
inline Matrix activation_slope(const Matrix& pre, const Matrix& post, Activation act) {
  if (act == Activation::relu) return (pre.array() > 0.0).cast<double>().matrix();
  return (post.array() * (1.0 - post.array())).matrix();
}

struct LayerCache {
  std::vector<Matrix> shifted;  // S^k X_(l-1)
  Matrix pre;                   // filterbank output
  Matrix post;                  // activation output (hidden layers only)
};

inline Matrix forward_cached(const GnnModel& model, const SparseShift& s, const Matrix& x, Activation act,
                             std::vector<LayerCache>* cache) {
  if (model.weights.empty()) throw UsageError("model has no layers");
  if (x.rows() != s.rows()) throw UsageError("feature rows do not match graph nodes");
  if (x.cols() != model.input_dim()) {
    throw UsageError("feature width " + std::to_string(x.cols()) + " does not match model input width " +
                     std::to_string(model.input_dim()));
  }
  Matrix current = x;
  const int layers = model.num_layers();
  for (int l = 0; l < layers; ++l) {
    const auto& taps = model.weights[static_cast<std::size_t>(l)];
    LayerCache entry;
    entry.shifted.push_back(current);
    for (std::size_t k = 1; k < taps.size(); ++k) entry.shifted.push_back(s * entry.shifted.back());
    entry.pre = entry.shifted[0] * taps[0];
    for (std::size_t k = 1; k < taps.size(); ++k) entry.pre.noalias() += entry.shifted[k] * taps[k];
    if (l + 1 < layers) {
      entry.post = activate(entry.pre, act);
      current = entry.post;
    } else {
      current = entry.pre;
    }
    if (cache != nullptr) cache->push_back(std::move(entry));
  }
  return current;
}

inline void check_nodes(std::span<const NodeId> nodes, const Labels& labels, Eigen::Index n, Eigen::Index classes,
                        std::string_view what) {
  if (nodes.empty()) throw UsageError(std::string(what) + " mask is empty");
  if (static_cast<Eigen::Index>(labels.size()) != n) throw UsageError("label count does not match graph nodes");
  for (NodeId u : nodes) {
    if (u < 0 || u >= n) throw UsageError(std::string(what) + " mask has out-of-range node " + std::to_string(u));
    if (labels[u] < 0 || labels[u] >= classes) {
      throw UsageError("label " + std::to_string(labels[u]) + " of node " + std::to_string(u) + " outside [0, " +
                       std::to_string(classes) + ")");
    }
  }
}

}  // namespace detail

/// Graph convolutional network: activation after every layer except the last,
/// whose filterbank output is returned as logits.
inline Matrix forward(const GnnModel& model, const SparseShift& s, const Matrix& x, Activation act) {
  return detail::forward_cached(model, s, x, act, nullptr);
}

inline Matrix forward(const GnnModel& model, const Graph& g, const Matrix& x, const GnnConfig& cfg) {
  if (x.rows() != g.num_nodes()) throw UsageError("feature rows do not match graph nodes");
  return forward(model, build_shift(g, cfg.shift), x, cfg.activation);
}

/// Mean softmax cross-entropy over `nodes`.
inline double masked_cross_entropy(const Matrix& logits, const Labels& labels, std::span<const NodeId> nodes) {
  double total = 0.0;
  for (NodeId u : nodes) {
    const auto row = logits.row(u);
    const double top = row.maxCoeff();
    const double lse = top + std::log((row.array() - top).exp().sum());
    total += lse - row[labels[u]];
  }
  return total / static_cast<double>(nodes.size());
}

struct LossAndGradient {
  double loss = 0.0;
  std::vector<std::vector<Matrix>> gradient;  // same layout as GnnModel::weights
};

/// Masked cross-entropy and its exact gradient with respect to every tap,
/// by reverse-mode differentiation through the shift recursion. Weight
/// decay is not part of the loss (it is applied decoupled by the optimizer).
inline LossAndGradient loss_and_gradient(const GnnModel& model, const SparseShift& s, const Matrix& x,
                                         const Labels& labels, std::span<const NodeId> nodes, Activation act) {
  detail::check_nodes(nodes, labels, x.rows(), model.output_dim(), "training");
  std::vector<detail::LayerCache> cache;
  const Matrix logits = detail::forward_cached(model, s, x, act, &cache);

  LossAndGradient out;
  Matrix grad = Matrix::Zero(logits.rows(), logits.cols());
  const double inv_count = 1.0 / static_cast<double>(nodes.size());
  double total = 0.0;
  for (NodeId u : nodes) {
    const auto row = logits.row(u);
    const double top = row.maxCoeff();
    const Eigen::RowVectorXd e = (row.array() - top).exp();
    const double z = e.sum();
    total += top + std::log(z) - row[labels[u]];
    grad.row(u) = e / z * inv_count;
    grad(u, labels[u]) -= inv_count;
  }
  out.loss = total * inv_count;

  const int layers = model.num_layers();
  out.gradient.resize(static_cast<std::size_t>(layers));
  for (int l = layers - 1; l >= 0; --l) {
    const auto& taps = model.weights[static_cast<std::size_t>(l)];
    const auto& entry = cache[static_cast<std::size_t>(l)];
    auto& layer_grad = out.gradient[static_cast<std::size_t>(l)];
    layer_grad.resize(taps.size());
    for (std::size_t k = 0; k < taps.size(); ++k) layer_grad[k] = entry.shifted[k].transpose() * grad;
    if (l == 0) break;
    // d/dX of sum_k S^k X H_k, Horner form; S is symmetric.
    Matrix back = grad * taps.back().transpose();
    for (std::size_t k = taps.size() - 1; k-- > 0;) {
      back = s * back;
      back.noalias() += grad * taps[k].transpose();
    }
    const auto& below = cache[static_cast<std::size_t>(l - 1)];
    grad = back.cwiseProduct(detail::activation_slope(below.pre, below.post, act));
  }
  return out;
}

struct TrainResult {
  GnnModel model;
  /// Training loss before each epoch's update.
  std::vector<double> losses;
};

/// Full-batch Adam (beta1 0.9, beta2 0.999, eps 1e-8) with decoupled weight
/// decay, on masked cross-entropy. Deterministic for a fixed cfg.seed.
inline TrainResult train(const Graph& g, const Matrix& x, const Labels& labels, std::span<const NodeId> train_nodes,
                         const GnnConfig& cfg, int classes) {
  if (x.rows() != g.num_nodes()) throw UsageError("feature rows do not match graph nodes");
  if (cfg.epochs < 0) throw UsageError("epoch count must be nonnegative");
  detail::check_nodes(train_nodes, labels, x.rows(), classes, "training");
  constexpr double beta1 = 0.9;
  constexpr double beta2 = 0.999;
  constexpr double eps = 1e-8;

  TrainResult result{init_model(cfg, static_cast<int>(x.cols()), classes), {}};
  auto& weights = result.model.weights;
  const SparseShift s = build_shift(g, cfg.shift);

  std::vector<std::vector<Matrix>> m1;
  std::vector<std::vector<Matrix>> m2;
  for (const auto& layer : weights) {
    auto& a = m1.emplace_back();
    auto& b = m2.emplace_back();
    for (const auto& h : layer) {
      a.push_back(Matrix::Zero(h.rows(), h.cols()));
      b.push_back(Matrix::Zero(h.rows(), h.cols()));
    }
  }

  result.losses.reserve(static_cast<std::size_t>(cfg.epochs));
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto step = loss_and_gradient(result.model, s, x, labels, train_nodes, cfg.activation);
    if (!std::isfinite(step.loss)) throw NumericalError("diverged: non-finite training loss at epoch " + std::to_string(epoch));
    result.losses.push_back(step.loss);
    const double c1 = 1.0 - std::pow(beta1, epoch);
    const double c2 = 1.0 - std::pow(beta2, epoch);
    for (std::size_t l = 0; l < weights.size(); ++l) {
      for (std::size_t k = 0; k < weights[l].size(); ++k) {
        const Matrix& gk = step.gradient[l][k];
        m1[l][k] = beta1 * m1[l][k] + (1.0 - beta1) * gk;
        m2[l][k] = beta2 * m2[l][k] + (1.0 - beta2) * gk.cwiseAbs2();
        const auto update = (m1[l][k].array() / c1) / ((m2[l][k].array() / c2).sqrt() + eps);
        weights[l][k].array() -= cfg.learning_rate * (update + cfg.weight_decay * weights[l][k].array());
      }
    }
  }
  if (!result.model.all_finite()) throw NumericalError("diverged: non-finite weights after training");
  return result;
}

/// Fraction of `nodes` whose argmax logit (smallest class on ties) matches the label.
inline double accuracy(const Matrix& logits, const Labels& labels, std::span<const NodeId> nodes) {
  if (nodes.empty()) throw UsageError("evaluation mask is empty");
  std::size_t hits = 0;
  for (NodeId u : nodes) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < logits.cols(); ++c) {
      if (logits(u, c) > logits(u, best)) best = c;
    }
    hits += best == labels[u];
  }
  return static_cast<double>(hits) / static_cast<double>(nodes.size());
}

inline double evaluate(const GnnModel& model, const Graph& g, const Matrix& x, const Labels& labels,
                       std::span<const NodeId> eval_nodes, const GnnConfig& cfg) {
  detail::check_nodes(eval_nodes, labels, g.num_nodes(), model.output_dim(), "evaluation");
  return accuracy(forward(model, g, x, cfg), labels, eval_nodes);
}

}  // namespace homsample::gnn
