#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fpt/trainer.hpp"

namespace fpt {

struct GradCheckConfig {
  std::size_t instances = 100;
  std::size_t max_regions = 8;  // M is drawn from [2, max_regions]
  std::size_t max_dim = 16;     // C is drawn from [2, max_dim]
  std::vector<double> taus{1.0, 0.1, 0.07};
  double step = 1e-5;           // central difference step
  std::uint64_t seed = 0;
};

struct GradCheckRecord {
  std::string term;
  std::size_t instance = 0;
  std::size_t regions = 0;
  std::size_t dim = 0;
  double tau = 0.0;
  double rel_error = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckRecord> records;
  double max_rel_error = 0.0;
  std::size_t resampled = 0;  // model instances redrawn because a ReLU kink was in reach
};

/// ||a - f|| / max(||a||, ||f||), or 0 when both vanish.
double relative_error(const Eigen::VectorXd& analytic, const Eigen::VectorXd& numeric);

/// Central differences against the analytic gradients of the raw InfoNCE and
/// D2S kernels and of each objective term (spatial, temporal, cross, d2s)
/// taken through row normalization of every operand.
GradCheckReport check_loss_gradients(const GradCheckConfig& config);

/// Central differences against evaluate() for every model parameter on small
/// random batches.
GradCheckReport check_model_gradients(const GradCheckConfig& config);

/// Random prepared batch: `regions` regions per frame with 1-4 points and
/// pixels each, random partial temporal matches and a dense cloud whose
/// regions match the keyframe one to one.
PreparedBatch random_prepared_batch(std::uint64_t seed, std::size_t regions, int input_width,
                                    int image_channels);

}  // namespace fpt
