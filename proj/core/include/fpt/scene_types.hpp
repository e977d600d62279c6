#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace fpt {

/// Pixel value marking "no region".
inline constexpr std::uint32_t kUnlabeled = 0xFFFFFFFFu;

/// Per-pixel region (superpixel) or class ids, row-major H x W.
class LabelMap {
 public:
  LabelMap() = default;
  LabelMap(std::uint32_t width, std::uint32_t height, std::uint32_t fill = kUnlabeled);
  LabelMap(std::uint32_t width, std::uint32_t height, std::vector<std::uint32_t> labels);

  std::uint32_t width() const { return width_; }
  std::uint32_t height() const { return height_; }
  std::size_t pixel_count() const { return labels_.size(); }

  std::uint32_t at(std::uint32_t x, std::uint32_t y) const {
    return labels_[static_cast<std::size_t>(y) * width_ + x];
  }
  void set(std::uint32_t x, std::uint32_t y, std::uint32_t label) {
    labels_[static_cast<std::size_t>(y) * width_ + x] = label;
  }
  const std::vector<std::uint32_t>& labels() const { return labels_; }
  std::vector<std::uint32_t>& labels() { return labels_; }

  friend bool operator==(const LabelMap&, const LabelMap&) = default;

 private:
  std::uint32_t width_ = 0;
  std::uint32_t height_ = 0;
  std::vector<std::uint32_t> labels_;
};

/// Frozen image-backbone output: height x width cells, `channels` values per
/// cell, stored cell-major (row, column, channel). Its stride relative to the
/// image is image_width / width.
class FeatureMap {
 public:
  FeatureMap() = default;
  FeatureMap(std::uint32_t width, std::uint32_t height, std::uint32_t channels,
             std::vector<double> data);

  std::uint32_t width() const { return width_; }
  std::uint32_t height() const { return height_; }
  std::uint32_t channels() const { return channels_; }
  const std::vector<double>& data() const { return data_; }

  double at(std::uint32_t x, std::uint32_t y, std::uint32_t c) const {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }

 private:
  std::uint32_t width_ = 0;
  std::uint32_t height_ = 0;
  std::uint32_t channels_ = 0;
  std::vector<double> data_;
};

using ScoreMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// N x C per-point class scores. When flagged as probabilities every row lies
/// on the simplex (entries in [0, 1], row sum 1 within 1e-6).
class SemanticScores {
 public:
  SemanticScores() = default;
  SemanticScores(ScoreMatrix data, bool probabilities);

  std::size_t rows() const { return static_cast<std::size_t>(data_.rows()); }
  std::size_t classes() const { return static_cast<std::size_t>(data_.cols()); }
  bool probabilities() const { return probabilities_; }
  const ScoreMatrix& data() const { return data_; }

 private:
  ScoreMatrix data_ = ScoreMatrix(0, 0);
  bool probabilities_ = false;
};

inline constexpr double kSimplexTolerance = 1e-6;

/// Per-row argmax; ties resolve to the lowest class index.
std::vector<std::uint32_t> argmax_labels(const SemanticScores& scores);

}  // namespace fpt
