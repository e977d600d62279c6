#include "fpt/scene_types.hpp"

#include <cmath>
#include <string>

#include "fpt/error.hpp"

namespace fpt {

LabelMap::LabelMap(std::uint32_t width, std::uint32_t height, std::uint32_t fill)
    : width_(width), height_(height),
      labels_(static_cast<std::size_t>(width) * height, fill) {}

LabelMap::LabelMap(std::uint32_t width, std::uint32_t height, std::vector<std::uint32_t> labels)
    : width_(width), height_(height), labels_(std::move(labels)) {
  if (labels_.size() != static_cast<std::size_t>(width) * height)
    throw InvalidArgument("label map data has " + std::to_string(labels_.size()) +
                          " entries, expected " + std::to_string(std::size_t{width} * height));
}

FeatureMap::FeatureMap(std::uint32_t width, std::uint32_t height, std::uint32_t channels,
                       std::vector<double> data)
    : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
  if (data_.size() != static_cast<std::size_t>(width) * height * channels)
    throw InvalidArgument("feature map data size does not match width * height * channels");
  for (double v : data_)
    if (!std::isfinite(v)) throw InvalidArgument("feature map contains non-finite values");
}

SemanticScores::SemanticScores(ScoreMatrix data, bool probabilities)
    : data_(std::move(data)), probabilities_(probabilities) {
  if (!data_.allFinite()) throw InvalidArgument("semantic scores contain non-finite values");
  if (!probabilities_) return;
  for (Eigen::Index i = 0; i < data_.rows(); ++i) {
    const auto row = data_.row(i);
    if (row.size() > 0 && (row.minCoeff() < 0.0 || row.maxCoeff() > 1.0))
      throw InvalidArgument("probability row " + std::to_string(i) + " has entries outside [0, 1]");
    if (std::abs(row.sum() - 1.0) > kSimplexTolerance)
      throw InvalidArgument("probability row " + std::to_string(i) + " does not sum to 1");
  }
}

std::vector<std::uint32_t> argmax_labels(const SemanticScores& scores) {
  std::vector<std::uint32_t> out(scores.rows(), 0);
  const auto& d = scores.data();
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < d.cols(); ++c)
      if (d(i, c) > d(i, best)) best = c;
    out[static_cast<std::size_t>(i)] = static_cast<std::uint32_t>(best);
  }
  return out;
}

}  // namespace fpt
