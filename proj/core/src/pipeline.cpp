#include "fpt/pipeline.hpp"

#include <cmath>
#include <string>

#include "fpt/error.hpp"

namespace fpt {

std::size_t frame_offset(double timespan, double timestep) {
  if (!(timestep > 0.0)) throw InvalidArgument("timestep must be positive");
  const double ratio = timespan / timestep;
  const double rounded = std::round(ratio);
  if (!(rounded >= 1.0) || std::abs(ratio - rounded) > 1e-6)
    throw InvalidArgument("timespan " + std::to_string(timespan) +
                          " is not a positive multiple of the timestep " + std::to_string(timestep));
  return static_cast<std::size_t>(rounded);
}

FrameInputs frame_inputs(const SyntheticScene& scene, std::size_t k) {
  if (k >= scene.frames.size()) throw InvalidArgument("frame index out of range");
  const SceneFrame& f = scene.frames[k];
  return {f.cloud, scene.cameras, f.instance_maps, f.features};
}

TrainBatch make_train_batch(const SyntheticScene& scene, std::size_t key, std::size_t offset,
                            std::size_t sweeps) {
  const std::size_t n = scene.frames.size();
  if (offset == 0 || key < offset || key + offset >= n || key < sweeps)
    throw InvalidArgument("keyframe " + std::to_string(key) + " with offset " +
                          std::to_string(offset) + " and " + std::to_string(sweeps) +
                          " sweeps does not fit a sequence of " + std::to_string(n) + " frames");
  TrainBatch batch;
  batch.frames = {frame_inputs(scene, key - offset), frame_inputs(scene, key),
                  frame_inputs(scene, key + offset)};
  const RigidTransform world_to_key = scene.frames[key].ego_pose.inverse();
  for (std::size_t s = 1; s <= sweeps; ++s) {
    const SceneFrame& sweep = scene.frames[key - s];
    batch.sweeps.emplace_back(sweep.cloud, compose(world_to_key, sweep.ego_pose));
  }
  return batch;
}

TrainBatch make_train_batch(const SyntheticScene& scene, double timespan, std::size_t sweeps) {
  const std::size_t offset = frame_offset(timespan, scene.timestep());
  return make_train_batch(scene, scene.frames.size() / 2, offset, sweeps);
}

}  // namespace fpt
