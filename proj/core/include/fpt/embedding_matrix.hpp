#pragma once

#include <Eigen/Core>

namespace fpt {

using RowMatrixXd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Unit-norm tolerance for rows of a normalized EmbeddingMatrix.
inline constexpr double kUnitNormTolerance = 1e-9;

/// M x C group embeddings.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;

  /// Wraps already-normalized rows; rejects any row whose norm is off by
  /// more than kUnitNormTolerance.
  static EmbeddingMatrix from_normalized(RowMatrixXd rows);
  /// l2-normalizes every row; rejects zero rows (the message names the row).
  static EmbeddingMatrix normalize(const RowMatrixXd& rows);
  /// Wraps rows without any normalization claim.
  static EmbeddingMatrix unnormalized(RowMatrixXd rows);

  Eigen::Index rows() const { return data_.rows(); }
  Eigen::Index dim() const { return data_.cols(); }
  bool normalized() const { return normalized_; }
  const RowMatrixXd& data() const { return data_; }

 private:
  EmbeddingMatrix(RowMatrixXd data, bool normalized)
      : data_(std::move(data)), normalized_(normalized) {}

  RowMatrixXd data_ = RowMatrixXd(0, 0);
  bool normalized_ = false;
};

/// Row-wise l2 normalization; throws InvalidArgument on a zero row.
RowMatrixXd normalize_rows(const RowMatrixXd& x);

/// Gradient of row-wise normalization: given x and dL/dy with y = x/|x|,
/// returns dL/dx.
RowMatrixXd normalize_rows_backward(const RowMatrixXd& x, const RowMatrixXd& grad_y);

}  // namespace fpt
