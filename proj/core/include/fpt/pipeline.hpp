#pragma once

#include <cstddef>

#include "fpt/scene.hpp"
#include "fpt/trainer.hpp"

namespace fpt {

inline constexpr double kDefaultTimespan = 0.5;  // seconds between paired frames
inline constexpr std::size_t kDefaultSweeps = 2;

/// Number of frames covering `timespan`; rejects spans that are not a
/// positive whole number of timesteps.
std::size_t frame_offset(double timespan, double timestep);

/// Camera inputs of frame k with instance maps as superpixels.
FrameInputs frame_inputs(const SyntheticScene& scene, std::size_t k);

/// Frames key - offset, key, key + offset and the `sweeps` frames directly
/// before the keyframe, each mapped into the keyframe ego frame.
TrainBatch make_train_batch(const SyntheticScene& scene, std::size_t key, std::size_t offset,
                            std::size_t sweeps);

/// Default batch: keyframe in the middle of the sequence.
TrainBatch make_train_batch(const SyntheticScene& scene, double timespan = kDefaultTimespan,
                            std::size_t sweeps = kDefaultSweeps);

}  // namespace fpt
