#include "fpt/scene.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>

#include <Eigen/LU>
#include <nlohmann/json.hpp>

#include "fpt/calibration.hpp"
#include "fpt/container.hpp"
#include "fpt/error.hpp"
#include "fpt/rng.hpp"

namespace fpt {

namespace {

using nlohmann::json;

constexpr double kDegToRad = std::numbers::pi / 180.0;

// Stream salts for derive_seed.
constexpr std::uint64_t kSaltObjects = 1;
constexpr std::uint64_t kSaltEmbeddings = 2;
constexpr std::uint64_t kSaltFrame = 1000;
constexpr std::uint64_t kSaltFeatures = 2000;
constexpr std::uint64_t kSaltFlips = 3000;

Vec3 class_size(std::uint32_t cls, Rng& rng) {
  static const Vec3 kTable[] = {
      {4.2, 1.8, 1.6},  // car
      {7.0, 2.5, 3.0},  // truck
      {0.7, 0.7, 1.8},  // pedestrian
      {2.5, 0.4, 1.0},  // barrier
      {1.8, 0.6, 1.7},  // cyclist
  };
  Vec3 base = cls - 1 < std::size(kTable)
                  ? kTable[cls - 1]
                  : Vec3(1.0 + 0.5 * (cls % 5), 0.8 + 0.3 * (cls % 3), 1.0 + 0.2 * (cls % 4));
  for (int a = 0; a < 3; ++a) base[a] *= rng.uniform(0.9, 1.1);
  return base;
}

double class_reflectivity(std::uint32_t cls, std::uint32_t num_classes) {
  return 0.1 + 0.8 * (static_cast<double>(cls) + 0.5) / static_cast<double>(num_classes);
}

RigidTransform ego_pose_at(const SceneConfig& cfg, double t) {
  const double omega = cfg.ego_yaw_rate_deg * kDegToRad;
  const double v = cfg.ego_speed;
  if (omega == 0.0) return RigidTransform::from_yaw(0.0, Vec3(v * t, 0.0, 0.0));
  return RigidTransform::from_yaw(
      omega * t, Vec3(v / omega * std::sin(omega * t), v / omega * (1.0 - std::cos(omega * t)), 0.0));
}

// Slab test of a world-frame ray against an oriented box; returns the entry
// distance or +inf.
double ray_box(const Vec3& origin, const Vec3& dir, const SceneObject& obj, double t) {
  const Vec3 c = obj.center_at(t);
  const double cy = std::cos(obj.yaw);
  const double sy = std::sin(obj.yaw);
  const Vec3 rel = origin - c;
  const Vec3 o(cy * rel.x() + sy * rel.y(), -sy * rel.x() + cy * rel.y(), rel.z());
  const Vec3 d(cy * dir.x() + sy * dir.y(), -sy * dir.x() + cy * dir.y(), dir.z());
  double t0 = 0.0;
  double t1 = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    const double half = 0.5 * obj.size[a];
    if (d[a] == 0.0) {
      if (std::abs(o[a]) > half) return std::numeric_limits<double>::infinity();
      continue;
    }
    double ta = (-half - o[a]) / d[a];
    double tb = (half - o[a]) / d[a];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return std::numeric_limits<double>::infinity();
  }
  return t0 > 0.0 ? t0 : std::numeric_limits<double>::infinity();
}

Vec3 sample_box_surface(const SceneObject& obj, double t, Rng& rng) {
  const double lx = obj.size.x(), ly = obj.size.y(), lz = obj.size.z();
  // Faces: +-x sides, +-y sides, top.
  const double areas[5] = {ly * lz, ly * lz, lx * lz, lx * lz, lx * ly};
  double pick = rng.uniform() * (areas[0] + areas[1] + areas[2] + areas[3] + areas[4]);
  int face = 0;
  while (face < 4 && pick >= areas[face]) pick -= areas[face++];
  const double a = rng.uniform(-0.5, 0.5);
  const double b = rng.uniform(-0.5, 0.5);
  Vec3 local;
  switch (face) {
    case 0: local = {0.5 * lx, a * ly, b * lz}; break;
    case 1: local = {-0.5 * lx, a * ly, b * lz}; break;
    case 2: local = {a * lx, 0.5 * ly, b * lz}; break;
    case 3: local = {a * lx, -0.5 * ly, b * lz}; break;
    default: local = {a * lx, b * ly, 0.5 * lz}; break;
  }
  const double cy = std::cos(obj.yaw);
  const double sy = std::sin(obj.yaw);
  return obj.center_at(t) + Vec3(cy * local.x() - sy * local.y(), sy * local.x() + cy * local.y(),
                                 local.z());
}

std::vector<SceneObject> place_objects(const SceneConfig& cfg, Rng& rng) {
  std::vector<SceneObject> objects;
  const double a = cfg.object_area;
  int attempts = 0;
  while (objects.size() < cfg.num_objects) {
    if (++attempts > 100000)
      throw InvalidArgument("cannot place " + std::to_string(cfg.num_objects) +
                            " non-overlapping objects in the configured area");
    SceneObject obj;
    obj.instance = static_cast<std::uint32_t>(objects.size() + 1);
    obj.semantic_class = 1 + static_cast<std::uint32_t>(rng.below(cfg.num_classes - 1));
    obj.size = class_size(obj.semantic_class, rng);
    obj.yaw = rng.uniform(-std::numbers::pi, std::numbers::pi);
    obj.center = Vec3(rng.uniform(0.0, 2.0 * a), rng.uniform(-a, a), 0.5 * obj.size.z());
    const bool moving = rng.bernoulli(cfg.moving_fraction);
    const double speed = moving ? rng.uniform(0.5, std::max(0.5, cfg.max_object_speed)) : 0.0;
    obj.velocity = Vec3(speed * std::cos(obj.yaw), speed * std::sin(obj.yaw), 0.0);

    const double radius = 0.5 * obj.size.head<2>().norm();
    if (obj.center.head<2>().norm() < 8.0 + radius) continue;
    bool overlaps = false;
    for (const auto& other : objects) {
      const double r2 = 0.5 * other.size.head<2>().norm();
      if ((other.center - obj.center).head<2>().norm() < radius + r2 + 0.5) overlaps = true;
    }
    if (!overlaps) objects.push_back(obj);
  }
  return objects;
}

struct Renderer {
  const SceneConfig& cfg;
  const std::vector<SceneObject>& objects;

  // Instance id seen through pixel (x, y) of camera `cam` at time t.
  std::uint32_t trace(const Vec3& origin, const Vec3& dir, double t) const {
    double best = std::numeric_limits<double>::infinity();
    std::uint32_t hit = kUnlabeled;
    if (dir.z() < 0.0) {
      best = -origin.z() / dir.z();
      hit = kGroundInstance;
    }
    for (const auto& obj : objects) {
      const double d = ray_box(origin, dir, obj, t);
      if (d < best) {
        best = d;
        hit = obj.instance;
      }
    }
    return hit;
  }

  LabelMap render(const CalibratedCamera& cam, const RigidTransform& ego_pose, double t) const {
    const std::uint32_t w = cam.intrinsics.width();
    const std::uint32_t h = cam.intrinsics.height();
    LabelMap map(w, h);
    const RigidTransform cam_to_world = compose(ego_pose, cam.extrinsic.inverse());
    const Vec3 origin = cam_to_world.translation();
    const Mat3 k_inv = cam.intrinsics.matrix().inverse();
    for (std::uint32_t y = 0; y < h; ++y)
      for (std::uint32_t x = 0; x < w; ++x) {
        const Vec3 ray = k_inv * Vec3(x + 0.5, y + 0.5, 1.0);
        map.set(x, y, trace(origin, cam_to_world.rotation() * ray, t));
      }
    return map;
  }
};

std::vector<Eigen::VectorXd> class_embeddings(const SceneConfig& cfg, std::uint64_t seed) {
  Rng rng(derive_seed(seed, kSaltEmbeddings));
  // One extra embedding for unlabeled (sky) cells.
  std::vector<Eigen::VectorXd> out;
  for (std::uint32_t c = 0; c <= cfg.num_classes; ++c) {
    Eigen::VectorXd v(cfg.feature_channels);
    for (auto& x : v) x = rng.normal();
    out.push_back(v / v.norm());
  }
  return out;
}

FeatureMap render_features(const SceneConfig& cfg, const LabelMap& instance_map,
                           const std::vector<std::uint32_t>& class_of_instance,
                           const std::vector<Eigen::VectorXd>& embeddings, Rng& rng) {
  const std::uint32_t s = cfg.feature_stride;
  const std::uint32_t fw = cfg.image_width / s;
  const std::uint32_t fh = cfg.image_height / s;
  const std::uint32_t e = cfg.feature_channels;
  std::vector<double> data(static_cast<std::size_t>(fw) * fh * e);
  for (std::uint32_t cy = 0; cy < fh; ++cy)
    for (std::uint32_t cx = 0; cx < fw; ++cx) {
      const std::uint32_t inst = instance_map.at(cx * s + s / 2, cy * s + s / 2);
      const std::uint32_t cls = inst == kUnlabeled ? cfg.num_classes : class_of_instance[inst];
      double* cell = data.data() + (static_cast<std::size_t>(cy) * fw + cx) * e;
      for (std::uint32_t c = 0; c < e; ++c)
        cell[c] = embeddings[cls][c] + cfg.feature_noise * rng.normal();
    }
  return FeatureMap(fw, fh, e, std::move(data));
}

}  // namespace

void validate_scene_config(const SceneConfig& c) {
  auto fail = [](const std::string& m) { throw InvalidArgument("invalid scene config: " + m); };
  if (c.num_cameras == 0) fail("at least one camera is required");
  if (c.num_frames == 0) fail("at least one frame is required");
  if (c.num_objects == 0) fail("at least one object is required");
  if (c.num_classes < 2) fail("num_classes must be >= 2 (class 0 is the ground)");
  if (!(c.timestep > 0.0)) fail("timestep must be positive");
  if (c.image_width == 0 || c.image_height == 0) fail("image size must be positive");
  if (c.feature_stride == 0 || c.image_width % c.feature_stride != 0 ||
      c.image_height % c.feature_stride != 0)
    fail("feature_stride must divide the image size");
  if (c.feature_channels == 0) fail("feature_channels must be positive");
  if (!(c.camera_hfov_deg > 0.0 && c.camera_hfov_deg < 180.0)) fail("camera_hfov_deg out of range");
  if (!(c.object_area > 0.0) || !(c.ground_radius >= 0.0)) fail("areas must be positive");
  if (c.moving_fraction < 0.0 || c.moving_fraction > 1.0) fail("moving_fraction must be in [0, 1]");
  if (c.view_flip_prob < 0.0 || c.view_flip_prob > 1.0) fail("view_flip_prob must be in [0, 1]");
  if (c.feature_noise < 0.0 || c.point_noise < 0.0 || c.intensity_noise < 0.0)
    fail("noise levels must be non-negative");
}

std::vector<CalibratedCamera> make_camera_rig(const SceneConfig& cfg) {
  const double focal = 0.5 * cfg.image_width / std::tan(0.5 * cfg.camera_hfov_deg * kDegToRad);
  Mat3 k;
  k << focal, 0.0, 0.5 * cfg.image_width, 0.0, focal, 0.5 * cfg.image_height, 0.0, 0.0, 1.0;
  const CameraIntrinsics intrinsics(k, cfg.image_width, cfg.image_height);

  std::vector<CalibratedCamera> rig;
  for (std::uint32_t j = 0; j < cfg.num_cameras; ++j) {
    const double yaw =
        (static_cast<double>(j) - 0.5 * (cfg.num_cameras - 1)) * cfg.camera_spacing_deg * kDegToRad;
    const double c = std::cos(yaw);
    const double s = std::sin(yaw);
    Mat3 r;  // rows: camera x (right), y (down), z (forward) in ego coordinates
    r << s, -c, 0.0, 0.0, 0.0, -1.0, c, s, 0.0;
    const Vec3 center(0.0, 0.0, cfg.camera_height);
    rig.push_back({intrinsics, RigidTransform(r, -(r * center))});
  }
  return rig;
}

SyntheticScene generate_scene(std::uint64_t seed, const SceneConfig& config) {
  validate_scene_config(config);
  Rng object_rng(derive_seed(seed, kSaltObjects));
  return generate_scene(seed, config, place_objects(config, object_rng));
}

SyntheticScene generate_scene(std::uint64_t seed, const SceneConfig& base,
                              std::vector<SceneObject> objects) {
  SceneConfig config = base;
  config.num_objects = static_cast<std::uint32_t>(objects.size());
  validate_scene_config(config);
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const auto& o = objects[i];
    if (o.instance != i + 1)
      throw InvalidArgument("object " + std::to_string(i) + " must have instance id " +
                            std::to_string(i + 1));
    if (o.semantic_class == kGroundClass || o.semantic_class >= config.num_classes)
      throw InvalidArgument("object " + std::to_string(i) + " has an invalid class");
    if (!(o.size.array() > 0.0).all()) throw InvalidArgument("object sizes must be positive");
  }
  SyntheticScene scene;
  scene.config = config;
  scene.seed = seed;
  scene.cameras = make_camera_rig(config);
  scene.objects = std::move(objects);

  std::vector<std::uint32_t> class_of_instance(scene.objects.size() + 1, kGroundClass);
  for (const auto& obj : scene.objects) class_of_instance[obj.instance] = obj.semantic_class;
  const auto embeddings = class_embeddings(config, seed);
  const Renderer renderer{config, scene.objects};

  for (std::uint32_t k = 0; k < config.num_frames; ++k) {
    SceneFrame frame;
    frame.timestamp = k * config.timestep;
    frame.ego_pose = ego_pose_at(config, frame.timestamp);
    const RigidTransform world_to_ego = frame.ego_pose.inverse();
    Rng rng(derive_seed(seed, kSaltFrame + k));

    // Surface samples in world coordinates.
    std::vector<Vec3> world;
    std::vector<std::uint32_t> instance;
    const Vec3 ego_pos = frame.ego_pose.translation();
    for (std::uint32_t i = 0; i < config.ground_points; ++i) {
      const double r = config.ground_radius * std::sqrt(rng.uniform());
      const double theta = rng.uniform(0.0, 2.0 * std::numbers::pi);
      world.emplace_back(ego_pos.x() + r * std::cos(theta), ego_pos.y() + r * std::sin(theta), 0.0);
      instance.push_back(kGroundInstance);
    }
    for (const auto& obj : scene.objects)
      for (std::uint32_t i = 0; i < config.points_per_object; ++i) {
        world.push_back(sample_box_surface(obj, frame.timestamp, rng));
        instance.push_back(obj.instance);
      }

    CoordMatrix coords(static_cast<Eigen::Index>(world.size()), 3);
    AttrMatrix attrs(static_cast<Eigen::Index>(world.size()), 1);
    for (std::size_t i = 0; i < world.size(); ++i) {
      Vec3 p = world[i];
      for (int a = 0; a < 3; ++a) p[a] += config.point_noise * rng.normal();
      const auto row = static_cast<Eigen::Index>(i);
      coords.row(row) = world_to_ego.apply(p).transpose();
      attrs(row, 0) = class_reflectivity(class_of_instance[instance[i]], config.num_classes) +
                      config.intensity_noise * rng.normal();
    }
    const PointCloud raw(std::move(coords), std::move(attrs), frame.timestamp);

    for (const auto& cam : scene.cameras)
      frame.instance_maps.push_back(renderer.render(cam, frame.ego_pose, frame.timestamp));

    // Keep only points that land on their own instance in every camera.
    std::vector<bool> keep(raw.size(), true);
    for (std::uint32_t j = 0; j < scene.cameras.size(); ++j)
      for (const auto& proj :
           project_points(raw, scene.cameras[j].intrinsics, scene.cameras[j].extrinsic, j)) {
        const auto [x, y] = pixel_of(proj);
        if (frame.instance_maps[j].at(x, y) != instance[proj.point_index])
          keep[proj.point_index] = false;
      }
    const auto kept = static_cast<Eigen::Index>(std::count(keep.begin(), keep.end(), true));
    CoordMatrix kc(kept, 3);
    AttrMatrix ka(kept, 1);
    Eigen::Index row = 0;
    for (std::size_t i = 0; i < raw.size(); ++i) {
      if (!keep[i]) continue;
      const auto src = static_cast<Eigen::Index>(i);
      kc.row(row) = raw.coords().row(src);
      ka.row(row) = raw.attrs().row(src);
      frame.point_instance.push_back(instance[i]);
      frame.point_class.push_back(class_of_instance[instance[i]]);
      ++row;
    }
    frame.cloud = PointCloud(std::move(kc), std::move(ka), frame.timestamp);

    Rng flip_rng(derive_seed(seed, kSaltFlips + k));
    Rng feature_rng(derive_seed(seed, kSaltFeatures + k));
    for (std::uint32_t j = 0; j < scene.cameras.size(); ++j) {
      std::vector<std::uint32_t> view_class = class_of_instance;
      for (std::size_t inst = 1; inst < view_class.size(); ++inst) {
        if (!flip_rng.bernoulli(config.view_flip_prob) || config.num_classes < 3) continue;
        auto other = 1 + static_cast<std::uint32_t>(flip_rng.below(config.num_classes - 2));
        if (other >= view_class[inst]) ++other;
        view_class[inst] = other;
      }
      LabelMap cls(config.image_width, config.image_height);
      const auto& inst_map = frame.instance_maps[j];
      for (std::size_t p = 0; p < inst_map.pixel_count(); ++p)
        if (inst_map.labels()[p] != kUnlabeled)
          cls.labels()[p] = view_class[inst_map.labels()[p]];
      frame.class_maps.push_back(std::move(cls));
      frame.features.push_back(
          render_features(config, inst_map, class_of_instance, embeddings, feature_rng));
    }
    scene.frames.push_back(std::move(frame));
  }
  return scene;
}

SemanticScores make_noisy_scores(std::span<const std::uint32_t> labels, std::uint32_t num_classes,
                                 double noise_rate, std::uint64_t seed) {
  if (num_classes < 2) throw InvalidArgument("noisy scores need at least two classes");
  if (noise_rate < 0.0 || noise_rate > 1.0) throw InvalidArgument("noise rate must be in [0, 1]");
  Rng rng(seed);
  ScoreMatrix data(static_cast<Eigen::Index>(labels.size()), num_classes);
  Eigen::RowVectorXd u(num_classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= num_classes)
      throw InvalidArgument("label " + std::to_string(labels[i]) + " is out of range");
    std::uint32_t label = labels[i];
    if (rng.bernoulli(noise_rate)) {
      auto other = static_cast<std::uint32_t>(rng.below(num_classes - 1));
      if (other >= label) ++other;
      label = other;
    }
    for (auto& x : u) x = rng.uniform() + 1e-3;
    auto row = data.row(static_cast<Eigen::Index>(i));
    row = 0.4 * u / u.sum();
    row(label) += 0.6;
  }
  return SemanticScores(std::move(data), true);
}

// ---------------------------------------------------------------------------
// Scene directory I/O

std::string scene_config_json(const SceneConfig& c) {
  json j = {
      {"num_frames", c.num_frames},
      {"timestep", c.timestep},
      {"num_cameras", c.num_cameras},
      {"camera_spacing_deg", c.camera_spacing_deg},
      {"camera_hfov_deg", c.camera_hfov_deg},
      {"camera_height", c.camera_height},
      {"image_width", c.image_width},
      {"image_height", c.image_height},
      {"feature_stride", c.feature_stride},
      {"feature_channels", c.feature_channels},
      {"feature_noise", c.feature_noise},
      {"num_objects", c.num_objects},
      {"num_classes", c.num_classes},
      {"moving_fraction", c.moving_fraction},
      {"max_object_speed", c.max_object_speed},
      {"ego_speed", c.ego_speed},
      {"ego_yaw_rate_deg", c.ego_yaw_rate_deg},
      {"object_area", c.object_area},
      {"ground_radius", c.ground_radius},
      {"ground_points", c.ground_points},
      {"points_per_object", c.points_per_object},
      {"point_noise", c.point_noise},
      {"intensity_noise", c.intensity_noise},
      {"view_flip_prob", c.view_flip_prob},
  };
  return j.dump();
}

SceneConfig scene_config_from_json(const std::string& json_text) {
  SceneConfig c;
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("scene config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw FormatError("scene config must be a JSON object");
  auto take = [&](const char* key, auto& field) {
    if (!j.contains(key)) return;
    try {
      j.at(key).get_to(field);
    } catch (const json::exception&) {
      throw FormatError(std::string("scene config field \"") + key + "\" has the wrong type");
    }
  };
  take("num_frames", c.num_frames);
  take("timestep", c.timestep);
  take("num_cameras", c.num_cameras);
  take("camera_spacing_deg", c.camera_spacing_deg);
  take("camera_hfov_deg", c.camera_hfov_deg);
  take("camera_height", c.camera_height);
  take("image_width", c.image_width);
  take("image_height", c.image_height);
  take("feature_stride", c.feature_stride);
  take("feature_channels", c.feature_channels);
  take("feature_noise", c.feature_noise);
  take("num_objects", c.num_objects);
  take("num_classes", c.num_classes);
  take("moving_fraction", c.moving_fraction);
  take("max_object_speed", c.max_object_speed);
  take("ego_speed", c.ego_speed);
  take("ego_yaw_rate_deg", c.ego_yaw_rate_deg);
  take("object_area", c.object_area);
  take("ground_radius", c.ground_radius);
  take("ground_points", c.ground_points);
  take("points_per_object", c.points_per_object);
  take("point_noise", c.point_noise);
  take("intensity_noise", c.intensity_noise);
  take("view_flip_prob", c.view_flip_prob);
  return c;
}

namespace {

std::string frame_dir(std::size_t k) {
  std::ostringstream s;
  s << "frame_" << std::setw(3) << std::setfill('0') << k;
  return s.str();
}

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw FormatError("expected a 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

std::vector<std::filesystem::path> write_scene(const std::filesystem::path& dir,
                                               const SyntheticScene& scene) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw FormatError("cannot create " + dir.string() + ": " + ec.message());
  std::vector<fs::path> written;

  json manifest;
  manifest["format"] = "fpt-scene-1";
  manifest["seed"] = scene.seed;
  manifest["config"] = json::parse(scene_config_json(scene.config));
  manifest["frames"] = json::array();
  for (const auto& f : scene.frames) manifest["frames"].push_back({{"timestamp", f.timestamp}});
  manifest["objects"] = json::array();
  for (const auto& o : scene.objects)
    manifest["objects"].push_back({{"instance", o.instance},
                                   {"class", o.semantic_class},
                                   {"center", vec_json(o.center)},
                                   {"size", vec_json(o.size)},
                                   {"yaw", o.yaw},
                                   {"velocity", vec_json(o.velocity)}});
  write_text_file(dir / "scene.json", manifest.dump(2) + "\n");
  written.push_back(dir / "scene.json");

  for (std::size_t j = 0; j < scene.cameras.size(); ++j) {
    const auto path = dir / ("calib_" + std::to_string(j) + ".json");
    write_calibration(path, scene.cameras[j]);
    written.push_back(path);
  }
  std::vector<RigidTransform> poses;
  for (const auto& f : scene.frames) poses.push_back(f.ego_pose);
  write_poses(dir / "poses.txt", poses);
  written.push_back(dir / "poses.txt");

  for (std::size_t k = 0; k < scene.frames.size(); ++k) {
    const auto& f = scene.frames[k];
    const fs::path fd = dir / frame_dir(k);
    fs::create_directories(fd, ec);
    if (ec) throw FormatError("cannot create " + fd.string() + ": " + ec.message());
    auto put = [&](const fs::path& p, const Bytes& bytes) {
      write_bytes(p, bytes);
      written.push_back(p);
    };
    put(fd / "cloud.fpt", encode_cloud(f.cloud));
    put(fd / "class.fpt", encode_labels(f.point_class));
    put(fd / "instance.fpt", encode_labels(f.point_instance));
    for (std::size_t j = 0; j < scene.cameras.size(); ++j) {
      const auto sj = std::to_string(j);
      put(fd / ("instance_map_" + sj + ".fpt"), encode_label_map(f.instance_maps[j]));
      put(fd / ("class_map_" + sj + ".fpt"), encode_label_map(f.class_maps[j]));
      put(fd / ("features_" + sj + ".fpt"), encode_feature_map(f.features[j]));
    }
  }
  return written;
}

SyntheticScene read_scene(const std::filesystem::path& dir) {
  json manifest;
  try {
    manifest = json::parse(read_text_file(dir / "scene.json"));
  } catch (const json::exception& e) {
    throw FormatError((dir / "scene.json").string() + ": " + e.what());
  }
  if (manifest.value("format", "") != "fpt-scene-1")
    throw FormatError((dir / "scene.json").string() + ": unsupported scene format");

  SyntheticScene scene;
  try {
    scene.seed = manifest.at("seed").get<std::uint64_t>();
    scene.config = scene_config_from_json(manifest.at("config").dump());
    for (const auto& o : manifest.at("objects")) {
      SceneObject obj;
      obj.instance = o.at("instance").get<std::uint32_t>();
      obj.semantic_class = o.at("class").get<std::uint32_t>();
      obj.center = vec_from(o.at("center"));
      obj.size = vec_from(o.at("size"));
      obj.yaw = o.at("yaw").get<double>();
      obj.velocity = vec_from(o.at("velocity"));
      scene.objects.push_back(obj);
    }
  } catch (const json::exception& e) {
    throw FormatError((dir / "scene.json").string() + ": " + e.what());
  }

  for (std::uint32_t j = 0; j < scene.config.num_cameras; ++j)
    scene.cameras.push_back(read_calibration(dir / ("calib_" + std::to_string(j) + ".json")));
  const auto poses = read_poses(dir / "poses.txt");
  const auto& frames = manifest.at("frames");
  if (poses.size() != frames.size())
    throw FormatError("poses.txt has " + std::to_string(poses.size()) + " poses for " +
                      std::to_string(frames.size()) + " frames");

  for (std::size_t k = 0; k < frames.size(); ++k) {
    SceneFrame f;
    const auto fd = dir / frame_dir(k);
    f.timestamp = frames[k].at("timestamp").get<double>();
    f.ego_pose = poses[k];
    f.cloud = read_cloud(fd / "cloud.fpt");
    f.point_class = read_labels(fd / "class.fpt");
    f.point_instance = read_labels(fd / "instance.fpt");
    for (std::size_t j = 0; j < scene.cameras.size(); ++j) {
      const auto sj = std::to_string(j);
      f.instance_maps.push_back(read_label_map(fd / ("instance_map_" + sj + ".fpt")));
      f.class_maps.push_back(read_label_map(fd / ("class_map_" + sj + ".fpt")));
      f.features.push_back(read_feature_map(fd / ("features_" + sj + ".fpt")));
    }
    scene.frames.push_back(std::move(f));
  }
  return scene;
}

}  // namespace fpt
