#pragma once

#include <array>
#include <optional>

#include "fpt/embedding_matrix.hpp"

namespace fpt {

/// Loss value with its gradients w.r.t. both embedding arguments.
struct LossResult {
  double value = 0.0;
  RowMatrixXd grad_q;
  RowMatrixXd grad_k;
};

inline constexpr double kDefaultTemperature = 0.07;

/// Contrastive loss between index-aligned rows of Q and K:
///   -(1/M) sum_i log( exp(<q_i,k_i>/tau) / sum_j exp(<q_i,k_j>/tau) ).
/// Requires normalized inputs of equal shape, M >= 1 and tau > 0. Serves the
/// spatial (Q^t, K^t), intra-sensor temporal (Q^t, Q^t') and cross-sensor
/// temporal (Q^t, K^t') objectives.
LossResult info_nce(const EmbeddingMatrix& q, const EmbeddingMatrix& k, double tau);

/// Dense-to-sparse consistency: (1/M) sum_i (1 - <qd_i, qt_i>).
LossResult d2s_loss(const EmbeddingMatrix& dense, const EmbeddingMatrix& sparse);

namespace kernels {
// The same formulas on raw matrices: no normalization or size checks beyond
// shape agreement. Exposed so gradients can be checked by finite differences
// on unconstrained inputs.
LossResult info_nce(const RowMatrixXd& q, const RowMatrixXd& k, double tau);
LossResult d2s(const RowMatrixXd& dense, const RowMatrixXd& sparse);
}  // namespace kernels

struct LossWeights {
  double spatial = 1.0;
  double temporal = 1.0;  // intra-sensor temporal
  double cross = 1.0;     // cross-sensor temporal
  double d2s = 1.0;
};

/// Operands of one objective term; `a` is the Q-side argument.
struct LossPair {
  EmbeddingMatrix a;
  EmbeddingMatrix b;
};

/// Operands of the full pretraining objective. A missing term (nullopt or
/// zero rows) contributes 0 and is flagged in the result.
struct ObjectiveInputs {
  std::array<std::optional<LossPair>, 3> spatial;  // (Q, K) at t-dt, t, t+dt
  std::array<std::optional<LossPair>, 2> temporal; // (Q^t, Q^{t+dt}), (Q^t, Q^{t-dt})
  std::array<std::optional<LossPair>, 2> cross;    // (Q^t, K^{t+dt}), (Q^t, K^{t-dt})
  std::optional<LossPair> d2s;                     // (Q^d, Q^t)
};

struct TermResult {
  bool present = false;
  double value = 0.0;    // unweighted term value
  RowMatrixXd grad_a;    // d(total)/d(a), weights and averaging applied
  RowMatrixXd grad_b;    // d(total)/d(b)
};

struct ObjectiveResult {
  double total = 0.0;
  double spatial = 0.0;   // mean over the three spatial terms
  double temporal = 0.0;  // mean over the two intra-sensor terms
  double cross = 0.0;     // mean over the two cross-sensor terms
  double d2s = 0.0;
  std::array<TermResult, 3> spatial_terms;
  std::array<TermResult, 2> temporal_terms;
  std::array<TermResult, 2> cross_terms;
  TermResult d2s_term;
};

/// total = w_sc * mean(spatial) + w_tc * mean(temporal) + w_cc * mean(cross)
///       + w_d2s * d2s.
/// Means divide by the nominal term count (3, 2, 2) even when a term is absent.
ObjectiveResult composite_objective(const ObjectiveInputs& inputs, double tau,
                                    const LossWeights& weights);

}  // namespace fpt
