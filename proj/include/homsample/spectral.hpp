#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "homsample/errors.hpp"
#include "homsample/features.hpp"
#include "homsample/graph.hpp"

// Dense verification routines for expressivity and leverage-score claims.
// Not a production path: everything here is O(n^3) and capped at n <= 2000.

namespace homsample::spectral {

inline constexpr Eigen::Index kMaxDenseNodes = 2000;

enum class ShiftKind { adjacency, laplacian, custom };

/// Dense symmetric graph shift operator.
class ShiftOperator {
 public:
  ShiftOperator(Eigen::MatrixXd matrix, ShiftKind kind = ShiftKind::custom) : matrix_(std::move(matrix)), kind_(kind) {
    if (matrix_.rows() != matrix_.cols()) throw UsageError("shift operator must be square");
    if (matrix_.rows() > kMaxDenseNodes) {
      throw UsageError("dense shift operator limited to " + std::to_string(kMaxDenseNodes) + " nodes");
    }
    const double scale = std::max(1.0, matrix_.cwiseAbs().maxCoeff());
    if ((matrix_ - matrix_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
      throw UsageError("shift operator is not symmetric");
    }
  }

  static ShiftOperator adjacency(const Graph& g) { return {dense_adjacency(g), ShiftKind::adjacency}; }

  static ShiftOperator laplacian(const Graph& g) {
    Eigen::MatrixXd a = dense_adjacency(g);
    Eigen::MatrixXd l = -a;
    l.diagonal() = a.rowwise().sum();
    return {std::move(l), ShiftKind::laplacian};
  }

  const Eigen::MatrixXd& matrix() const { return matrix_; }
  ShiftKind kind() const { return kind_; }
  Eigen::Index size() const { return matrix_.rows(); }

 private:
  static Eigen::MatrixXd dense_adjacency(const Graph& g) {
    if (g.num_nodes() > kMaxDenseNodes) {
      throw UsageError("dense shift operator limited to " + std::to_string(kMaxDenseNodes) + " nodes");
    }
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(g.num_nodes(), g.num_nodes());
    g.for_each_edge([&](NodeId u, NodeId v) { a(u, v) = a(v, u) = 1.0; });
    return a;
  }

  Eigen::MatrixXd matrix_;
  ShiftKind kind_;
};

/// Numerical rank: singular values above max(rows, cols) * eps * sigma_max.
inline Eigen::Index numerical_rank(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0;
  const Eigen::VectorXd sv = Eigen::BDCSVD<Eigen::MatrixXd>(m).singularValues();
  if (sv.size() == 0 || sv[0] == 0.0) return 0;
  const double tol =
      static_cast<double>(std::max(m.rows(), m.cols())) * std::numeric_limits<double>::epsilon() * sv[0];
  return (sv.array() > tol).count();
}

inline Eigen::Index shift_rank(const ShiftOperator& s) { return numerical_rank(s.matrix()); }

/// Dimension of span{x, Sx, ..., S^(k_max-1) x}, the signals reachable by a
/// k_max-tap graph convolution of x. Each Krylov column is rescaled to unit
/// norm (or left zero) before the rank is taken.
inline Eigen::Index conv_span_dimension(const ShiftOperator& s, const Eigen::VectorXd& x, int k_max) {
  if (k_max < 1) throw UsageError("k_max must be at least 1");
  if (x.size() != s.size()) throw UsageError("signal length does not match shift operator");
  const double norm = x.norm();
  if (!(norm > 0.0)) throw UsageError("signal must be nonzero");
  Eigen::MatrixXd krylov(s.size(), k_max);
  Eigen::VectorXd z = x / norm;
  krylov.col(0) = z;
  for (int k = 1; k < k_max; ++k) {
    z = s.matrix() * z;
    const double zn = z.norm();
    if (zn > 0.0) z /= zn;
    krylov.col(k) = z;
  }
  return numerical_rank(krylov);
}

/// Max |diag(X X^T) - diag(U Sigma^2 U^T)| over nodes, with X = U Sigma V^T
/// the thin SVD. Zero up to rounding: node scores are singular-value
/// weighted leverage scores.
inline double leverage_identity_check(const Matrix& x) {
  if (x.rows() < 1 || x.cols() < 1) throw UsageError("feature matrix must be at least 1 x 1");
  const Eigen::MatrixXd dense = x;
  const Eigen::VectorXd direct = dense.rowwise().squaredNorm();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(dense, Eigen::ComputeThinU);
  const Eigen::VectorXd sigma2 = svd.singularValues().array().square();
  const Eigen::VectorXd via_svd = (svd.matrixU().array().square().matrix() * sigma2);
  return (direct - via_svd).cwiseAbs().maxCoeff();
}

}  // namespace homsample::spectral
