#include "fpt/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fpt/error.hpp"

namespace fpt {

RowMatrixXd point_inputs(const PointCloud& cloud) {
  RowMatrixXd x(cloud.coords().rows(), 3 + cloud.attr_width());
  x.leftCols(3) = cloud.coords() * kCoordScale;
  x.rightCols(cloud.attr_width()) = cloud.attrs();
  return x;
}

RowMatrixXd encode_points(const PointEncoder& encoder, const PointCloud& cloud) {
  if (3 + cloud.attr_width() != encoder.input_width())
    throw InvalidArgument("encoder expects " + std::to_string(encoder.input_width()) +
                          " input columns, cloud provides " +
                          std::to_string(3 + cloud.attr_width()));
  const RowMatrixXd x = point_inputs(cloud);
  RowMatrixXd hidden = x * encoder.w1;
  hidden.rowwise() += encoder.b1.row(0);
  hidden = hidden.cwiseMax(0.0);
  RowMatrixXd out = hidden * encoder.w2;
  out.rowwise() += encoder.b2.row(0);
  return out;
}

namespace {

struct Tap {
  std::uint32_t i0, i1;
  double w1;  // weight of i1; i0 gets 1 - w1
};

Tap bilinear_tap(std::uint32_t dst, std::uint32_t out_size, std::uint32_t in_size) {
  const double scale = static_cast<double>(in_size) / static_cast<double>(out_size);
  const double src = std::max((static_cast<double>(dst) + 0.5) * scale - 0.5, 0.0);
  const auto i0 = std::min(static_cast<std::uint32_t>(src), in_size - 1);
  const std::uint32_t i1 = std::min(i0 + 1, in_size - 1);
  const double frac = i0 == in_size - 1 ? 0.0 : src - static_cast<double>(i0);
  return {i0, i1, frac};
}

}  // namespace

void upsample_pixel(const FeatureMap& features, std::uint32_t out_width, std::uint32_t out_height,
                    std::uint32_t x, std::uint32_t y, double* out) {
  const Tap tx = bilinear_tap(x, out_width, features.width());
  const Tap ty = bilinear_tap(y, out_height, features.height());
  const double w00 = (1.0 - ty.w1) * (1.0 - tx.w1);
  const double w01 = (1.0 - ty.w1) * tx.w1;
  const double w10 = ty.w1 * (1.0 - tx.w1);
  const double w11 = ty.w1 * tx.w1;
  for (std::uint32_t c = 0; c < features.channels(); ++c) {
    out[c] = w00 * features.at(tx.i0, ty.i0, c) + w01 * features.at(tx.i1, ty.i0, c) +
             w10 * features.at(tx.i0, ty.i1, c) + w11 * features.at(tx.i1, ty.i1, c);
  }
}

RowMatrixXd upsample_bilinear(const FeatureMap& features, std::uint32_t out_width,
                              std::uint32_t out_height) {
  if (features.width() == 0 || features.height() == 0)
    throw InvalidArgument("cannot upsample an empty feature map");
  if (out_width == 0 || out_height == 0) throw InvalidArgument("upsampling target is empty");
  RowMatrixXd out(static_cast<Eigen::Index>(out_width) * out_height, features.channels());
  for (std::uint32_t y = 0; y < out_height; ++y)
    for (std::uint32_t x = 0; x < out_width; ++x)
      upsample_pixel(features, out_width, out_height, x, y,
                     out.row(static_cast<Eigen::Index>(y) * out_width + x).data());
  return out;
}

EmbeddingMatrix project_and_normalize(const ProjectionHead& head, const RowMatrixXd& feats) {
  if (feats.cols() != head.weight.rows())
    throw InvalidArgument("projection head expects " + std::to_string(head.weight.rows()) +
                          " input features, got " + std::to_string(feats.cols()));
  if (!feats.allFinite()) throw InvalidArgument("features contain non-finite values");
  return EmbeddingMatrix::normalize(feats * head.weight);
}

EmbeddingMatrix project_and_normalize(const ProjectionHead& head, const FeatureMap& features,
                                      std::uint32_t image_width, std::uint32_t image_height) {
  return project_and_normalize(head, upsample_bilinear(features, image_width, image_height));
}

}  // namespace fpt
