#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "fpt/geometry.hpp"
#include "fpt/scene_types.hpp"

namespace fpt {

/// Parameters of the synthetic driving scene. Distances in meters, time in
/// seconds, angles in degrees.
struct SceneConfig {
  std::uint32_t num_frames = 11;
  double timestep = 0.1;
  std::uint32_t num_cameras = 3;
  double camera_spacing_deg = 50.0;  // yaw between neighbouring cameras
  double camera_hfov_deg = 70.0;
  double camera_height = 1.5;
  std::uint32_t image_width = 64;
  std::uint32_t image_height = 48;
  std::uint32_t feature_stride = 4;
  std::uint32_t feature_channels = 32;
  double feature_noise = 0.05;
  std::uint32_t num_objects = 10;
  std::uint32_t num_classes = 6;     // class 0 is the ground
  double moving_fraction = 0.5;
  double max_object_speed = 3.0;
  double ego_speed = 3.0;
  double ego_yaw_rate_deg = 0.0;
  double object_area = 20.0;         // objects are placed in [0, 2a] x [-a, a]
  double ground_radius = 25.0;
  std::uint32_t ground_points = 600;
  std::uint32_t points_per_object = 150;
  double point_noise = 0.01;         // isotropic sensor noise on surface samples
  double intensity_noise = 0.05;
  double view_flip_prob = 0.15;      // per camera and instance: class map disagreement
};

/// A box standing on the ground plane moving with constant velocity.
struct SceneObject {
  std::uint32_t instance = 0;
  std::uint32_t semantic_class = 0;
  Vec3 center;       // world position of the box centre at t = 0
  Vec3 size;         // full extents along the box axes
  double yaw = 0.0;  // radians
  Vec3 velocity;     // world frame, m/s

  Vec3 center_at(double t) const { return center + t * velocity; }
};

/// Instance id used for the ground plane.
inline constexpr std::uint32_t kGroundInstance = 0;
inline constexpr std::uint32_t kGroundClass = 0;

struct SceneFrame {
  double timestamp = 0.0;
  PointCloud cloud;                          // ego frame, one intensity attribute
  RigidTransform ego_pose;                   // ego -> world
  std::vector<std::uint32_t> point_class;
  std::vector<std::uint32_t> point_instance;
  std::vector<LabelMap> instance_maps;       // per camera, instance ids
  std::vector<LabelMap> class_maps;          // per camera, possibly view-inconsistent classes
  std::vector<FeatureMap> features;          // per camera, frozen image features
};

/// Deterministic synthetic sequence with ground-truth correspondences.
///
/// Every point that projects into a camera lands on a pixel of that camera's
/// instance map carrying the point's own instance id (occluded samples are
/// discarded during generation).
struct SyntheticScene {
  SceneConfig config;
  std::uint64_t seed = 0;
  std::vector<CalibratedCamera> cameras;
  std::vector<SceneObject> objects;
  std::vector<SceneFrame> frames;
  double timestep() const { return config.timestep; }
};

/// Rejects configs with zero cameras, frames or objects and other degenerate
/// values.
void validate_scene_config(const SceneConfig& config);
SyntheticScene generate_scene(std::uint64_t seed, const SceneConfig& config = {});
/// Same generator with caller-placed objects (instance ids 1..n in order);
/// config.num_objects is taken from the list.
SyntheticScene generate_scene(std::uint64_t seed, const SceneConfig& config,
                              std::vector<SceneObject> objects);

/// Cameras of the rig described by `config`.
std::vector<CalibratedCamera> make_camera_rig(const SceneConfig& config);

/// Per-point noisy class scores: each label is replaced by a different class
/// with probability `noise_rate`; rows are 0.6 * onehot(label) plus 0.4 times
/// a random point of the simplex.
SemanticScores make_noisy_scores(std::span<const std::uint32_t> labels, std::uint32_t num_classes,
                                 double noise_rate, std::uint64_t seed);

// Scene directory layout written by write_scene:
//   scene.json          manifest (seed, config, frames, objects)
//   calib_<j>.json      camera j calibration
//   poses.txt           ego -> world pose per frame
//   frame_<k>/cloud.fpt, class.fpt, instance.fpt,
//            instance_map_<j>.fpt, class_map_<j>.fpt, features_<j>.fpt
std::vector<std::filesystem::path> write_scene(const std::filesystem::path& dir,
                                               const SyntheticScene& scene);
SyntheticScene read_scene(const std::filesystem::path& dir);

std::string scene_config_json(const SceneConfig& config);
SceneConfig scene_config_from_json(const std::string& json_text);

}  // namespace fpt
