#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "fpt/embedding.hpp"
#include "fpt/losses.hpp"
#include "fpt/superpoints.hpp"

namespace fpt {

struct ModelConfig {
  int hidden = 64;        // encoder hidden width
  int feature_dim = 64;   // D
  int embed_dim = 32;     // C
};

struct TrainConfig {
  double lr = 0.1;
  double tau = kDefaultTemperature;
  LossWeights weights;
  std::uint64_t seed = 0;
  ModelConfig model;
};

/// Every learnable tensor: the point encoder and both projection heads. The
/// image backbone is frozen and lives outside the model.
struct Model {
  PointEncoder encoder;
  ProjectionHead point_head;
  ProjectionHead image_head;

  /// Name/tensor pairs in a fixed order (checkpoint and gradient-check order).
  std::vector<std::pair<std::string, RowMatrixXd*>> parameters();
  std::vector<std::pair<std::string, const RowMatrixXd*>> parameters() const;
  std::size_t parameter_count() const;
  /// Same shapes, all zeros.
  Model zeros_like() const;
};

/// Seeded uniform init in [-1/sqrt(fan_in), 1/sqrt(fan_in)] for every tensor.
Model init_model(int input_width, int image_channels, const ModelConfig& config, std::uint64_t seed);

struct TrainState {
  Model model;
  std::uint64_t step = 0;
  std::uint64_t seed = 0;
  double lr = 0.1;
  double tau = kDefaultTemperature;
  LossWeights weights;
};

TrainState init_train_state(const TrainConfig& config, int input_width, int image_channels);

/// One timestamp of camera + LiDAR input.
struct FrameInputs {
  PointCloud cloud;
  std::vector<CalibratedCamera> cameras;
  std::vector<LabelMap> maps;        // superpixels, ids shared across time
  std::vector<FeatureMap> features;  // frozen backbone output per camera
};

/// Frames at t - dt, t, t + dt plus the sweeps preceding the keyframe, each
/// with its sweep-to-keyframe transform.
struct TrainBatch {
  std::array<FrameInputs, 3> frames;
  std::vector<std::pair<PointCloud, RigidTransform>> sweeps;
};

/// Rows grouped contiguously: group m owns rows [offsets[m], offsets[m+1]).
struct GroupedRows {
  RowMatrixXd rows;
  std::vector<Eigen::Index> offsets{0};
  std::size_t groups() const { return offsets.size() - 1; }
};

struct PreparedFrame {
  SuperpointIndex index;
  GroupedRows points;  // encoder inputs of member points, grouped by region
  GroupedRows pixels;  // upsampled frozen features of each region's pixels
};

/// Batch with superpoints, pixel groups and region correspondences resolved;
/// constant across training steps.
struct PreparedBatch {
  std::array<PreparedFrame, 3> frames;
  SuperpointIndex dense_index;
  GroupedRows dense_points;
  std::array<std::vector<std::pair<std::uint32_t, std::uint32_t>>, 2> temporal_matches;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> d2s_matches;  // (dense, keyframe)
};

PreparedBatch prepare_batch(const TrainBatch& batch);

struct LossBreakdown {
  double total = 0.0;
  double spatial = 0.0;
  double temporal = 0.0;
  double cross = 0.0;
  double d2s = 0.0;
  std::vector<std::string> missing;  // names of terms without matched regions
};

struct Evaluation {
  LossBreakdown loss;
  Model grad;  // d(total)/d(parameters); empty when not requested
};

Evaluation evaluate(const Model& model, const PreparedBatch& batch, double tau,
                    const LossWeights& weights, bool with_gradient);

/// Forward, analytic backward and one gradient-descent update. Bit-for-bit
/// reproducible for equal inputs.
std::pair<TrainState, LossBreakdown> train_step(const TrainState& state,
                                                const PreparedBatch& batch);

/// Mean cosine similarity of matched superpoint/superpixel embeddings and of
/// mismatched pairs, on the keyframe.
struct AlignmentStats {
  double matched = 0.0;
  double mismatched = 0.0;
};
AlignmentStats alignment_stats(const Model& model, const PreparedBatch& batch);


// Checkpoint = <dir>/checkpoint.fpt (all parameters concatenated as one
// P x 1 tensor) + <dir>/checkpoint.json (step, seed, config hash, layout).
void save_checkpoint(const std::filesystem::path& dir, const TrainState& state,
                     const std::string& config_hash);
TrainState load_checkpoint(const std::filesystem::path& dir);

}  // namespace fpt
