#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fpt/embedding_matrix.hpp"
#include "fpt/geometry.hpp"
#include "fpt/scene_types.hpp"

namespace fpt {

/// Per-point two-layer perceptron (3+L) -> hidden -> D with a rectifier
/// between the layers. Weights are stored input-major (x * W + b).
struct PointEncoder {
  RowMatrixXd w1;  // (3+L) x hidden
  RowMatrixXd b1;  // 1 x hidden
  RowMatrixXd w2;  // hidden x D
  RowMatrixXd b2;  // 1 x D

  Eigen::Index input_width() const { return w1.rows(); }
  Eigen::Index output_width() const { return w2.cols(); }
};

/// Linear map into the shared embedding space (no bias).
struct ProjectionHead {
  RowMatrixXd weight;  // in x C
};

/// Coordinates enter the encoder in units of 10 m.
inline constexpr double kCoordScale = 0.1;

/// Stacks scaled coordinates and attributes into the N x (3+L) encoder input.
RowMatrixXd point_inputs(const PointCloud& cloud);

/// N x D point features, one row per point in cloud order.
RowMatrixXd encode_points(const PointEncoder& encoder, const PointCloud& cloud);

/// Bilinear upsampling of a feature grid to out_width x out_height pixels with
/// half-pixel-centred sampling (source = (dst + 0.5) * in/out - 0.5, clamped
/// to the grid). Rows are pixels in row-major order.
RowMatrixXd upsample_bilinear(const FeatureMap& features, std::uint32_t out_width,
                              std::uint32_t out_height);

/// Bilinear sample of one output pixel into `out` (length = channels).
void upsample_pixel(const FeatureMap& features, std::uint32_t out_width, std::uint32_t out_height,
                    std::uint32_t x, std::uint32_t y, double* out);

/// Point side: feats (N x D) -> rows of feats * W, l2-normalized.
EmbeddingMatrix project_and_normalize(const ProjectionHead& head, const RowMatrixXd& feats);

/// Image side: upsample the grid to the image size, map every pixel through
/// the head and l2-normalize. Rows are pixels in row-major order.
EmbeddingMatrix project_and_normalize(const ProjectionHead& head, const FeatureMap& features,
                                      std::uint32_t image_width, std::uint32_t image_height);

}  // namespace fpt
