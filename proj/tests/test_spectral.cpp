#include <gtest/gtest.h>

#include "homsample/graph.hpp"
#include "homsample/spectral.hpp"
#include "oracles.hpp"

using namespace homsample;
using spectral::ShiftOperator;

namespace {

/// Symmetric sum of r random outer products with eigen-weights in [1, 3).
Eigen::MatrixXd planted_rank(Eigen::Index n, Eigen::Index r, std::uint64_t seed) {
  const Eigen::MatrixXd v = oracle::random_matrix(n, r, seed);
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < r; ++i) {
    const double w = (i % 2 == 0 ? 1.0 : -1.0) * (1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(r));
    s += w * v.col(i) * v.col(i).transpose();
  }
  return 0.5 * (s + s.transpose());
}

}  // namespace

TEST(ShiftOperator, RejectsBadMatrices) {
  EXPECT_THROW(ShiftOperator(Eigen::MatrixXd::Zero(2, 3)), UsageError);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2, 2);
  a(0, 1) = 1.0;
  EXPECT_THROW(ShiftOperator{a}, UsageError);
}

TEST(ShiftOperator, GraphDerivedSparsityPattern) {
  const Graph g = build_graph(oracle::random_edge_list(30, 0.1, 1), 30);
  const auto a = ShiftOperator::adjacency(g);
  const auto l = ShiftOperator::laplacian(g);
  for (NodeId u = 0; u < 30; ++u) {
    for (NodeId v = 0; v < 30; ++v) {
      if (u == v) continue;
      EXPECT_EQ(a.matrix()(u, v) != 0.0, g.has_edge(u, v));
      EXPECT_EQ(l.matrix()(u, v) != 0.0, g.has_edge(u, v));
    }
    EXPECT_EQ(l.matrix()(u, u), static_cast<double>(g.degree(u)));
  }
}

TEST(ConvSpanDimension, FixedPointShiftGivesOne) {
  const Eigen::VectorXd x = oracle::random_matrix(8, 1, 2).col(0);
  for (int k : {1, 3, 8}) EXPECT_EQ(spectral::conv_span_dimension(ShiftOperator(Eigen::MatrixXd::Identity(8, 8)), x, k), 1);
  // Sx = x without S being the identity.
  const Eigen::VectorXd u = x.normalized();
  const ShiftOperator p(u * u.transpose());
  EXPECT_EQ(spectral::conv_span_dimension(p, x, 6), 1);
}

TEST(ConvSpanDimension, ZeroShiftGivesOne) {
  const Eigen::VectorXd x = oracle::random_matrix(6, 1, 3).col(0);
  EXPECT_EQ(spectral::conv_span_dimension(ShiftOperator(Eigen::MatrixXd::Zero(6, 6)), x, 5), 1);
}

TEST(ConvSpanDimension, PlantedRankFourReachesFive) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const ShiftOperator s(planted_rank(10, 4, seed));
    ASSERT_EQ(spectral::shift_rank(s), 4);
    const Eigen::VectorXd x = oracle::random_matrix(10, 1, 50 + seed).col(0);
    EXPECT_EQ(spectral::conv_span_dimension(s, x, 10), 5) << seed;
  }
}

TEST(ConvSpanDimension, NeverExceedsRankPlusOne) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 60; ++trial) {
    const auto n = static_cast<Eigen::Index>(2 + rng() % 49);
    const auto r = static_cast<Eigen::Index>(1 + rng() % n);
    const int k = static_cast<int>(1 + rng() % 20);
    const ShiftOperator s(planted_rank(n, r, 100 + static_cast<std::uint64_t>(trial)));
    const Eigen::VectorXd x = oracle::random_matrix(n, 1, 200 + static_cast<std::uint64_t>(trial)).col(0);
    const auto dim = spectral::conv_span_dimension(s, x, k);
    EXPECT_LE(dim, spectral::shift_rank(s) + 1);
    EXPECT_LE(dim, std::min<Eigen::Index>(n, k));
    EXPECT_GE(dim, 1);
  }
}

TEST(ConvSpanDimension, InvariantToScalingOfSignal) {
  const ShiftOperator s(planted_rank(20, 6, 4));
  const Eigen::VectorXd x = oracle::random_matrix(20, 1, 5).col(0);
  const auto base = spectral::conv_span_dimension(s, x, 12);
  for (double c : {-3.0, 1e-6, 2.5, 1e6}) EXPECT_EQ(spectral::conv_span_dimension(s, c * x, 12), base);
}

TEST(ConvSpanDimension, Errors) {
  const ShiftOperator s(Eigen::MatrixXd::Identity(3, 3));
  EXPECT_THROW(spectral::conv_span_dimension(s, Eigen::VectorXd::Zero(3), 2), UsageError);
  EXPECT_THROW(spectral::conv_span_dimension(s, Eigen::VectorXd::Ones(3), 0), UsageError);
  EXPECT_THROW(spectral::conv_span_dimension(s, Eigen::VectorXd::Ones(4), 2), UsageError);
}

TEST(ShiftRank, LaplacianRankIsNodesMinusComponents) {
  const Graph path = build_graph(std::vector<Edge>{{0, 1}, {1, 2}, {2, 3}});
  EXPECT_EQ(spectral::shift_rank(ShiftOperator::laplacian(path)), 3);
  const Graph split = build_graph(std::vector<Edge>{{0, 1}, {2, 3}, {4, 5}}, 7);
  EXPECT_EQ(spectral::shift_rank(ShiftOperator::laplacian(split)), 3);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Graph g = build_graph(oracle::random_edge_list(50, 0.04, seed), 50);
    EXPECT_EQ(spectral::shift_rank(ShiftOperator::laplacian(g)), 50 - connected_components(g).count);
    EXPECT_EQ(spectral::shift_rank(ShiftOperator::laplacian(g)), laplacian_rank(g));
  }
}

TEST(ShiftRank, RecoversPlantedRank) {
  for (Eigen::Index r = 1; r <= 12; ++r) {
    EXPECT_EQ(spectral::shift_rank(ShiftOperator(planted_rank(30, r, static_cast<std::uint64_t>(r)))), r);
  }
  EXPECT_EQ(spectral::shift_rank(ShiftOperator(Eigen::MatrixXd::Zero(4, 4))), 0);
}

TEST(LeverageIdentity, ScaledOrthonormalColumns) {
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(oracle::random_matrix(12, 3, 6)).householderQ() *
                            Eigen::MatrixXd::Identity(12, 3);
  const Matrix x = 2.0 * q;
  const Eigen::VectorXd leverage = q.rowwise().squaredNorm();
  EXPECT_LT((node_scores(x) - 4.0 * leverage).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT(spectral::leverage_identity_check(x), 1e-12);
}

TEST(LeverageIdentity, ZeroAndRandomMatrices) {
  EXPECT_EQ(spectral::leverage_identity_check(Matrix::Zero(5, 3)), 0.0);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    EXPECT_LT(spectral::leverage_identity_check(oracle::random_matrix(30, 5, seed)), 1e-9);
  }
  EXPECT_LT(spectral::leverage_identity_check(oracle::random_matrix(5, 30, 77)), 1e-9);
}
