#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "homsample/errors.hpp"
#include "homsample/graph.hpp"

namespace homsample {

/// Row-major dense matrix; one row per node.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Raw n x d node features, row i belongs to node i.
using FeatureMatrix = Matrix;
using Labels = std::vector<int>;

/// Per-column standardized features: X[i,j] -> (X[i,j] - mu_j) / (sqrt(d) sigma_j)
/// with population sigma. Columns with sigma = 0 are zeroed and flagged invalid.
struct NormalizedFeatures {
  Matrix values;
  std::vector<bool> valid;

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }
  std::size_t valid_count() const {
    std::size_t c = 0;
    for (bool v : valid) c += v;
    return c;
  }
};

/// The affine map behind NormalizedFeatures, reusable on other row sets that
/// share the same columns (e.g. a full graph after fitting on a subsample).
class FeatureNormalizer {
 public:
  FeatureNormalizer() = default;

  static FeatureNormalizer fit(const FeatureMatrix& x) {
    if (x.rows() < 1 || x.cols() < 1) throw UsageError("feature matrix must be at least 1 x 1");
    FeatureNormalizer f;
    const auto n = static_cast<double>(x.rows());
    const double root_d = std::sqrt(static_cast<double>(x.cols()));
    // Row-sequential passes; column walks over a row-major matrix thrash the cache.
    const Eigen::Index d = x.cols();
    std::vector<double> sum(static_cast<std::size_t>(d), 0.0);
    std::vector<double> peak(static_cast<std::size_t>(d), 0.0);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const double* row = x.data() + i * d;
      for (Eigen::Index j = 0; j < d; ++j) {
        sum[j] += row[j];
        peak[j] = std::max(peak[j], std::abs(row[j]));
      }
    }
    // Any inf or nan entry poisons its column sum.
    for (Eigen::Index j = 0; j < d; ++j) {
      if (std::isfinite(sum[j])) continue;
      if (!std::all_of(x.data(), x.data() + x.size(), [](double v) { return std::isfinite(v); })) {
        throw DataError("feature matrix has non-finite entries");
      }
      throw NumericalError("feature column " + std::to_string(j) + " sum overflows");
    }
    f.mean_.resize(d);
    for (Eigen::Index j = 0; j < d; ++j) f.mean_[j] = sum[j] / n;
    std::vector<double> squares(static_cast<std::size_t>(d), 0.0);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const double* row = x.data() + i * d;
      for (Eigen::Index j = 0; j < d; ++j) {
        const double c = row[j] - f.mean_[j];
        squares[j] += c * c;
      }
    }
    f.scale_ = Vector::Zero(x.cols());
    f.valid_.assign(static_cast<std::size_t>(x.cols()), false);
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      const double sigma = std::sqrt(squares[j] / n);
      // A constant column can leave sigma a few ulps above zero.
      if (sigma > 1e-12 * peak[j]) {
        f.scale_[j] = 1.0 / (root_d * sigma);
        f.valid_[j] = true;
      }
    }
    return f;
  }

  NormalizedFeatures apply(const FeatureMatrix& x) const {
    if (x.cols() != mean_.size()) {
      throw UsageError("normalizer fitted on " + std::to_string(mean_.size()) + " columns, got " +
                       std::to_string(x.cols()));
    }
    NormalizedFeatures out;
    out.values = (x.rowwise() - mean_.transpose()).array().rowwise() * scale_.transpose().array();
    out.valid = valid_;
    return out;
  }

  const Vector& mean() const { return mean_; }
  const Vector& scale() const { return scale_; }

 private:
  Vector mean_;
  Vector scale_;
  std::vector<bool> valid_;
};

inline NormalizedFeatures normalize_features(const FeatureMatrix& x) { return FeatureNormalizer::fit(x).apply(x); }

namespace instrumentation {
/// Number of node_scores passes on this thread; lets tests confirm the
/// sampler scores once per call rather than once per removal.
inline thread_local std::size_t score_passes = 0;
}  // namespace instrumentation

/// s[i] = squared norm of row i, i.e. diag(X X^T), in O(nd).
inline Vector node_scores(const Matrix& x) {
  ++instrumentation::score_passes;
  return x.rowwise().squaredNorm();
}

inline Vector node_scores(const NormalizedFeatures& xh) { return node_scores(xh.values); }

/// h_G = tr(-L X X^T) / n evaluated edge-wise as
/// -(1/n) * sum over undirected edges of ||X[u,:] - X[v,:]||^2, in O(dm).
inline double feature_homophily(const Graph& g, const Matrix& x) {
  if (x.rows() != g.num_nodes()) {
    throw UsageError("feature rows (" + std::to_string(x.rows()) + ") do not match graph nodes (" +
                     std::to_string(g.num_nodes()) + ")");
  }
  if (g.num_nodes() == 0) throw UsageError("homophily of an empty graph");
  const auto d = x.cols();
  const double* data = x.data();
  double total = 0.0;
  g.for_each_edge([&](NodeId u, NodeId v) {
    const double* a = data + u * d;
    const double* b = data + v * d;
    double acc = 0.0;
    for (Eigen::Index j = 0; j < d; ++j) {
      const double diff = a[j] - b[j];
      acc += diff * diff;
    }
    total += acc;
  });
  if (total == 0.0) return 0.0;
  return -total / static_cast<double>(g.num_nodes());
}

inline double feature_homophily(const Graph& g, const NormalizedFeatures& xh) {
  return feature_homophily(g, xh.values);
}

/// Lower bound on tr(L): -n h_G / tr(X X^T).
inline double trace_lower_bound(double homophily, const NormalizedFeatures& xh) {
  const double tr = xh.values.squaredNorm();
  if (!(tr > 0.0)) throw NumericalError("bound undefined: tr(X X^T) is zero (no valid feature columns)");
  const double bound = -static_cast<double>(xh.rows()) * homophily / tr;
  return bound == 0.0 ? 0.0 : bound;
}

}  // namespace homsample
