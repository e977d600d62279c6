#include "fpt/losses.hpp"

#include <cmath>
#include <string>

#include "fpt/error.hpp"

namespace fpt {

EmbeddingMatrix EmbeddingMatrix::from_normalized(RowMatrixXd rows) {
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    const double norm = rows.row(i).norm();
    if (!(std::abs(norm - 1.0) <= kUnitNormTolerance))
      throw InvalidArgument("embedding row " + std::to_string(i) + " has norm " +
                            std::to_string(norm) + ", expected 1");
  }
  return EmbeddingMatrix(std::move(rows), true);
}

EmbeddingMatrix EmbeddingMatrix::normalize(const RowMatrixXd& rows) {
  return EmbeddingMatrix(normalize_rows(rows), true);
}

EmbeddingMatrix EmbeddingMatrix::unnormalized(RowMatrixXd rows) {
  if (!rows.allFinite()) throw InvalidArgument("embedding contains non-finite values");
  return EmbeddingMatrix(std::move(rows), false);
}

RowMatrixXd normalize_rows(const RowMatrixXd& x) {
  RowMatrixXd y(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double norm = x.row(i).norm();
    if (!(norm > 0.0) || !std::isfinite(norm))
      throw InvalidArgument("cannot normalize row " + std::to_string(i) + " (norm " +
                            std::to_string(norm) + ")");
    y.row(i) = x.row(i) / norm;
  }
  return y;
}

RowMatrixXd normalize_rows_backward(const RowMatrixXd& x, const RowMatrixXd& grad_y) {
  RowMatrixXd gx(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double norm = x.row(i).norm();
    const Eigen::RowVectorXd y = x.row(i) / norm;
    gx.row(i) = (grad_y.row(i) - y.dot(grad_y.row(i)) * y) / norm;
  }
  return gx;
}

namespace kernels {

LossResult info_nce(const RowMatrixXd& q, const RowMatrixXd& k, double tau) {
  if (q.rows() != k.rows() || q.cols() != k.cols())
    throw InvalidArgument("info_nce operands differ in shape");
  const Eigen::Index m = q.rows();
  LossResult out;
  out.grad_q = RowMatrixXd::Zero(m, q.cols());
  out.grad_k = RowMatrixXd::Zero(m, q.cols());
  if (m == 0) return out;

  const RowMatrixXd logits = (q * k.transpose()) / tau;
  // d(loss)/d(logits) = (softmax - I) / M, built row by row.
  RowMatrixXd g(m, m);
  double total = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    const double row_max = logits.row(i).maxCoeff();
    const Eigen::RowVectorXd e = (logits.row(i).array() - row_max).exp().matrix();
    const double sum = e.sum();
    total += std::log(sum) + row_max - logits(i, i);
    g.row(i) = e / sum;
    g(i, i) -= 1.0;
  }
  const double inv_m = 1.0 / static_cast<double>(m);
  out.value = total * inv_m;
  g *= inv_m / tau;
  out.grad_q = g * k;
  out.grad_k = g.transpose() * q;
  return out;
}

LossResult d2s(const RowMatrixXd& dense, const RowMatrixXd& sparse) {
  if (dense.rows() != sparse.rows() || dense.cols() != sparse.cols())
    throw InvalidArgument("d2s operands differ in shape");
  const Eigen::Index m = dense.rows();
  LossResult out;
  if (m == 0) {
    out.grad_q = RowMatrixXd::Zero(0, dense.cols());
    out.grad_k = RowMatrixXd::Zero(0, dense.cols());
    return out;
  }
  const double inv_m = 1.0 / static_cast<double>(m);
  double total = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) total += 1.0 - dense.row(i).dot(sparse.row(i));
  out.value = total * inv_m;
  out.grad_q = -inv_m * sparse;
  out.grad_k = -inv_m * dense;
  return out;
}

}  // namespace kernels

namespace {

void require_pair(const EmbeddingMatrix& q, const EmbeddingMatrix& k, const char* what) {
  if (!q.normalized() || !k.normalized())
    throw InvalidArgument(std::string(what) + " requires l2-normalized embeddings");
  if (q.rows() != k.rows() || q.dim() != k.dim())
    throw InvalidArgument(std::string(what) + " operands differ in shape (" +
                          std::to_string(q.rows()) + "x" + std::to_string(q.dim()) + " vs " +
                          std::to_string(k.rows()) + "x" + std::to_string(k.dim()) + ")");
}

bool has_rows(const std::optional<LossPair>& p) { return p.has_value() && p->a.rows() > 0; }

TermResult weighted(const LossResult& r, double scale) {
  return TermResult{true, r.value, scale * r.grad_q, scale * r.grad_k};
}

}  // namespace

LossResult info_nce(const EmbeddingMatrix& q, const EmbeddingMatrix& k, double tau) {
  require_pair(q, k, "info_nce");
  if (q.rows() < 1) throw InvalidArgument("info_nce requires at least one row");
  if (!(tau > 0.0) || !std::isfinite(tau))
    throw InvalidArgument("temperature must be positive, got " + std::to_string(tau));
  return kernels::info_nce(q.data(), k.data(), tau);
}

LossResult d2s_loss(const EmbeddingMatrix& dense, const EmbeddingMatrix& sparse) {
  require_pair(dense, sparse, "d2s_loss");
  return kernels::d2s(dense.data(), sparse.data());
}

ObjectiveResult composite_objective(const ObjectiveInputs& inputs, double tau,
                                    const LossWeights& weights) {
  ObjectiveResult out;

  auto contrastive = [&](const auto& pairs, auto& terms, double weight, double& mean) {
    const double scale = weight / static_cast<double>(pairs.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      if (!has_rows(pairs[i])) continue;
      terms[i] = weighted(info_nce(pairs[i]->a, pairs[i]->b, tau), scale);
      sum += terms[i].value;
    }
    mean = sum / static_cast<double>(pairs.size());
  };
  contrastive(inputs.spatial, out.spatial_terms, weights.spatial, out.spatial);
  contrastive(inputs.temporal, out.temporal_terms, weights.temporal, out.temporal);
  contrastive(inputs.cross, out.cross_terms, weights.cross, out.cross);

  if (has_rows(inputs.d2s)) {
    out.d2s_term = weighted(d2s_loss(inputs.d2s->a, inputs.d2s->b), weights.d2s);
    out.d2s = out.d2s_term.value;
  }

  out.total = weights.spatial * out.spatial + weights.temporal * out.temporal +
              weights.cross * out.cross + weights.d2s * out.d2s;
  return out;
}

}  // namespace fpt
