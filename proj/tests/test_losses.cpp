#include <gtest/gtest.h>

#include <cmath>

#include "fpt/error.hpp"
#include "fpt/losses.hpp"
#include "test_support.hpp"

namespace fpt {
namespace {

EmbeddingMatrix unit(Rng& rng, Eigen::Index m, Eigen::Index c) {
  return EmbeddingMatrix::from_normalized(testing::random_unit_rows(rng, m, c));
}

TEST(InfoNce, SingleRowIsZero) {
  Rng rng(31);
  const EmbeddingMatrix q = unit(rng, 1, 5), k = unit(rng, 1, 5);
  const LossResult r = info_nce(q, k, 0.07);
  EXPECT_EQ(r.value, 0.0);
  EXPECT_EQ(r.grad_q.cwiseAbs().maxCoeff(), 0.0);
}

TEST(InfoNce, OrthonormalPairAtUnitTemperature) {
  const EmbeddingMatrix e = EmbeddingMatrix::from_normalized(RowMatrixXd{{1.0, 0.0}, {0.0, 1.0}});
  const double expected = std::log1p(std::exp(-1.0));
  EXPECT_NEAR(info_nce(e, e, 1.0).value, expected, 1e-15);
  EXPECT_NEAR(expected, 0.31326, 1e-5);
}

TEST(InfoNce, MatchesScalarOracle) {
  Rng rng(32);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index m = 1 + static_cast<Eigen::Index>(rng.below(16));
    const Eigen::Index c = 1 + static_cast<Eigen::Index>(rng.below(32));
    const double tau = std::array{1.0, 0.5, 0.1, 0.07, 0.01}[rng.below(5)];
    const EmbeddingMatrix q = unit(rng, m, c), k = unit(rng, m, c);
    EXPECT_NEAR(info_nce(q, k, tau).value, testing::info_nce_oracle(q.data(), k.data(), tau), 1e-12);
  }
}

TEST(InfoNce, GradientsMatchFiniteDifferences) {
  Rng rng(33);
  const RowMatrixXd q = testing::random_matrix(rng, 5, 4), k = testing::random_matrix(rng, 5, 4);
  const double tau = 0.5, h = 1e-6;
  const LossResult r = kernels::info_nce(q, k, tau);
  for (Eigen::Index i = 0; i < 5; ++i)
    for (Eigen::Index c = 0; c < 4; ++c) {
      RowMatrixXd qp = q, qm = q, kp = k, km = k;
      qp(i, c) += h;
      qm(i, c) -= h;
      kp(i, c) += h;
      km(i, c) -= h;
      EXPECT_NEAR(r.grad_q(i, c),
                  (kernels::info_nce(qp, k, tau).value - kernels::info_nce(qm, k, tau).value) / (2 * h),
                  1e-7);
      EXPECT_NEAR(r.grad_k(i, c),
                  (kernels::info_nce(q, kp, tau).value - kernels::info_nce(q, km, tau).value) / (2 * h),
                  1e-7);
    }
}

TEST(InfoNce, InvariantUnderJointRowPermutation) {
  Rng rng(34);
  const RowMatrixXd q = testing::random_unit_rows(rng, 7, 6), k = testing::random_unit_rows(rng, 7, 6);
  RowMatrixXd qp(7, 6), kp(7, 6);
  const int perm[7] = {3, 0, 6, 1, 5, 2, 4};
  for (int i = 0; i < 7; ++i) {
    qp.row(i) = q.row(perm[i]);
    kp.row(i) = k.row(perm[i]);
  }
  EXPECT_NEAR(kernels::info_nce(q, k, 0.1).value, kernels::info_nce(qp, kp, 0.1).value, 1e-12);
}

TEST(InfoNce, SmallTemperatureLimit) {
  // As tau -> 0 the loss approaches (1/M) sum_i max(0, max_j s_ij - s_ii) / tau.
  Rng rng(35);
  const RowMatrixXd q = testing::random_unit_rows(rng, 6, 3), k = testing::random_unit_rows(rng, 6, 3);
  const double tau = 1e-4;
  double hinge = 0.0;
  for (Eigen::Index i = 0; i < 6; ++i) {
    double best = -2.0;
    for (Eigen::Index j = 0; j < 6; ++j) best = std::max(best, q.row(i).dot(k.row(j)));
    hinge += best - q.row(i).dot(k.row(i));
  }
  hinge /= 6.0;
  const double v = kernels::info_nce(q, k, tau).value;
  EXPECT_TRUE(std::isfinite(v));
  EXPECT_NEAR(v * tau, hinge, 1e-3);
  // Aligned positives at vanishing temperature drive the loss to zero.
  EXPECT_NEAR(kernels::info_nce(q, q, 1e-4).value, 0.0, 1e-6);
}

TEST(InfoNce, RejectsBadInputs) {
  Rng rng(36);
  const EmbeddingMatrix q = unit(rng, 3, 4);
  EXPECT_THROW(info_nce(q, unit(rng, 3, 5), 0.1), InvalidArgument);
  EXPECT_THROW(info_nce(q, unit(rng, 2, 4), 0.1), InvalidArgument);
  EXPECT_THROW(info_nce(q, q, 0.0), InvalidArgument);
  EXPECT_THROW(info_nce(q, q, -1.0), InvalidArgument);
  EXPECT_THROW(info_nce(q, EmbeddingMatrix::unnormalized(RowMatrixXd::Ones(3, 4)), 0.1),
               InvalidArgument);
  const EmbeddingMatrix empty = EmbeddingMatrix::from_normalized(RowMatrixXd(0, 4));
  EXPECT_THROW(info_nce(empty, empty, 0.1), InvalidArgument);
}

TEST(D2s, IdenticalOppositeOrthogonal) {
  const EmbeddingMatrix a = EmbeddingMatrix::from_normalized(RowMatrixXd{{1.0, 0.0}});
  const EmbeddingMatrix b = EmbeddingMatrix::from_normalized(RowMatrixXd{{-1.0, 0.0}});
  const EmbeddingMatrix c = EmbeddingMatrix::from_normalized(RowMatrixXd{{0.0, 1.0}});
  EXPECT_EQ(d2s_loss(a, a).value, 0.0);
  EXPECT_EQ(d2s_loss(a, b).value, 2.0);
  EXPECT_EQ(d2s_loss(a, c).value, 1.0);
}

TEST(D2s, MatchesOracleAndGradient) {
  Rng rng(37);
  const EmbeddingMatrix a = unit(rng, 9, 7), b = unit(rng, 9, 7);
  const LossResult r = d2s_loss(a, b);
  EXPECT_NEAR(r.value, testing::d2s_oracle(a.data(), b.data()), 1e-12);
  EXPECT_LT((r.grad_q + b.data() / 9.0).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((r.grad_k + a.data() / 9.0).cwiseAbs().maxCoeff(), 1e-15);
}

LossPair same_pair(const EmbeddingMatrix& e) { return {e, e}; }

TEST(Composite, WeightedSumOfGroupMeans) {
  Rng rng(38);
  const EmbeddingMatrix q = unit(rng, 4, 3), k = unit(rng, 4, 3);
  ObjectiveInputs in;
  for (auto& t : in.spatial) t = LossPair{q, k};
  for (auto& t : in.temporal) t = LossPair{q, q};
  for (auto& t : in.cross) t = LossPair{k, q};
  in.d2s = LossPair{q, k};
  const LossWeights w{0.5, 2.0, 3.0, 4.0};
  const ObjectiveResult r = composite_objective(in, 0.2, w);
  const double sc = testing::info_nce_oracle(q.data(), k.data(), 0.2);
  const double tc = testing::info_nce_oracle(q.data(), q.data(), 0.2);
  const double cc = testing::info_nce_oracle(k.data(), q.data(), 0.2);
  const double dd = testing::d2s_oracle(q.data(), k.data());
  EXPECT_NEAR(r.spatial, sc, 1e-12);
  EXPECT_NEAR(r.temporal, tc, 1e-12);
  EXPECT_NEAR(r.cross, cc, 1e-12);
  EXPECT_NEAR(r.d2s, dd, 1e-12);
  EXPECT_NEAR(r.total, 0.5 * sc + 2.0 * tc + 3.0 * cc + 4.0 * dd, 1e-12);
  // Gradients carry the weight and the 1/3 spatial average.
  const LossResult single = info_nce(q, k, 0.2);
  EXPECT_LT((r.spatial_terms[1].grad_a - single.grad_q * (0.5 / 3.0)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Composite, MissingTermsAreFlaggedAndKeepTheDivisor) {
  Rng rng(39);
  const EmbeddingMatrix q = unit(rng, 4, 3);
  const EmbeddingMatrix k = unit(rng, 4, 3);
  ObjectiveInputs in;
  in.spatial[0] = LossPair{q, k};
  in.spatial[2] = LossPair{EmbeddingMatrix::from_normalized(RowMatrixXd(0, 3)),
                           EmbeddingMatrix::from_normalized(RowMatrixXd(0, 3))};
  const ObjectiveResult r = composite_objective(in, 0.5, LossWeights{});
  const double sc = testing::info_nce_oracle(q.data(), k.data(), 0.5);
  EXPECT_TRUE(r.spatial_terms[0].present);
  EXPECT_FALSE(r.spatial_terms[1].present);
  EXPECT_FALSE(r.spatial_terms[2].present);
  EXPECT_FALSE(r.temporal_terms[0].present);
  EXPECT_FALSE(r.d2s_term.present);
  EXPECT_NEAR(r.spatial, sc / 3.0, 1e-12);
  EXPECT_NEAR(r.total, sc / 3.0, 1e-12);
  EXPECT_EQ(r.temporal, 0.0);
  EXPECT_EQ(r.d2s, 0.0);
}

TEST(Composite, AllMissingIsZero) {
  const ObjectiveResult r = composite_objective(ObjectiveInputs{}, 0.07, LossWeights{});
  EXPECT_EQ(r.total, 0.0);
}

TEST(Composite, ZeroWeightSilencesATerm) {
  Rng rng(40);
  const EmbeddingMatrix q = unit(rng, 5, 3);
  ObjectiveInputs in;
  in.d2s = same_pair(q);
  for (auto& t : in.temporal) t = LossPair{q, unit(rng, 5, 3)};
  const ObjectiveResult r = composite_objective(in, 0.1, LossWeights{1.0, 0.0, 1.0, 1.0});
  EXPECT_GT(r.temporal, 0.0);
  EXPECT_NEAR(r.total, 0.0, 1e-15);
  EXPECT_EQ(r.temporal_terms[0].grad_a.cwiseAbs().maxCoeff(), 0.0);
}

}  // namespace
}  // namespace fpt
