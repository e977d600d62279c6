#include <spdlog/spdlog.h>

#include "commands.hpp"
#include "fpt/calibration.hpp"
#include "fpt/container.hpp"
#include "fpt/error.hpp"
#include "fpt/rng.hpp"
#include "fpt/scene.hpp"
#include "fpt/superpoints.hpp"

namespace fpt::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t kScoreSalt = 4000;

std::vector<CalibratedCamera> read_cameras(const std::vector<std::string>& paths) {
  std::vector<CalibratedCamera> cams;
  for (const auto& p : paths) cams.push_back(read_calibration(p));
  return cams;
}

std::vector<LabelMap> read_maps(const std::vector<std::string>& paths, std::size_t cameras) {
  if (paths.size() != cameras)
    throw InvalidArgument(std::to_string(paths.size()) + " label maps for " +
                          std::to_string(cameras) + " cameras");
  std::vector<LabelMap> maps;
  for (const auto& p : paths) maps.push_back(read_label_map(p));
  return maps;
}

void add_gen_scene(CLI::App& root, CommandList& list) {
  struct Args {
    std::uint64_t seed = 0;
    std::string out;
    std::uint32_t frames = SceneConfig{}.num_frames;
    std::uint32_t cameras = SceneConfig{}.num_cameras;
    std::uint32_t objects = SceneConfig{}.num_objects;
    std::uint32_t classes = SceneConfig{}.num_classes;
    std::uint32_t ground_points = SceneConfig{}.ground_points;
    std::uint32_t points_per_object = SceneConfig{}.points_per_object;
    double ground_radius = SceneConfig{}.ground_radius;
    double score_noise = 0.2;
  };
  auto a = std::make_shared<Args>();
  Command& c = new_command(root, list, "gen-scene", "Generate a seeded synthetic scene directory");
  Params& p = *c.params;
  p.add("seed", a->seed, "Scene seed");
  p.add("out", a->out, "Output directory");
  p.add("frames", a->frames, "Number of frames");
  p.add("cameras", a->cameras, "Number of cameras");
  p.add("objects", a->objects, "Number of objects");
  p.add("classes", a->classes, "Number of semantic classes");
  p.add("ground-points", a->ground_points, "Ground samples per frame");
  p.add("points-per-object", a->points_per_object, "Surface samples per object");
  p.add("ground-radius", a->ground_radius, "Radius of the sampled ground disc (m)");
  p.add("score-noise", a->score_noise, "Label-noise rate of the per-frame scores.fpt");
  c.run = [a] {
    if (a->out.empty()) throw UsageError("gen-scene: --out is required");
    SceneConfig cfg;
    cfg.num_frames = a->frames;
    cfg.num_cameras = a->cameras;
    cfg.num_objects = a->objects;
    cfg.num_classes = a->classes;
    cfg.ground_points = a->ground_points;
    cfg.points_per_object = a->points_per_object;
    cfg.ground_radius = a->ground_radius;
    spdlog::info("generating scene seed {} ({} frames, {} cameras)", a->seed, cfg.num_frames,
                 cfg.num_cameras);
    const SyntheticScene scene = generate_scene(a->seed, cfg);
    const fs::path dir(a->out);
    std::vector<fs::path> written = write_scene(dir, scene);
    for (std::size_t k = 0; k < scene.frames.size(); ++k) {
      const auto& f = scene.frames[k];
      const SemanticScores scores = make_noisy_scores(f.point_class, cfg.num_classes, a->score_noise,
                                                      derive_seed(a->seed, kScoreSalt + k));
      char name[32];
      std::snprintf(name, sizeof name, "frame_%03zu", k);
      const fs::path path = dir / name / "scores.fpt";
      write_scores(path, scores);
      written.push_back(path);
    }
    json files = json::array();
    std::string all;
    std::size_t points = 0;
    for (const auto& path : written) {
      files.push_back(file_entry(path, dir));
      all += files.back()["fnv1a64"].get<std::string>();
    }
    for (const auto& f : scene.frames) points += f.cloud.size();
    return json{{"frames", scene.frames.size()},
                {"points", points},
                {"files", files},
                {"checksum", hex64(fnv1a64(std::as_bytes(std::span(all))))}};
  };
}

void add_project(CLI::App& root, CommandList& list) {
  struct Args {
    std::string cloud;
    std::vector<std::string> calib;
    std::string out;
  };
  auto a = std::make_shared<Args>();
  Command& c = new_command(root, list, "project",
                           "Project a cloud into cameras; writes an N x 5 tensor "
                           "(point, camera, u, v, depth)");
  c.params->add("cloud", a->cloud, "FPT1 point cloud");
  c.params->add("calib", a->calib, "Calibration JSON per camera");
  c.params->add("out", a->out, "Output FPT1 tensor");
  c.run = [a] {
    if (a->cloud.empty() || a->calib.empty() || a->out.empty())
      throw UsageError("project: --cloud, --calib and --out are required");
    const PointCloud cloud = read_cloud(a->cloud);
    const auto cams = read_cameras(a->calib);
    std::vector<PixelProjection> all;
    json per_camera = json::array();
    for (std::uint32_t j = 0; j < cams.size(); ++j) {
      auto proj = project_points(cloud, cams[j].intrinsics, cams[j].extrinsic, j);
      per_camera.push_back(proj.size());
      all.insert(all.end(), proj.begin(), proj.end());
    }
    TensorMatrix t(static_cast<Eigen::Index>(all.size()), 5);
    for (std::size_t i = 0; i < all.size(); ++i) {
      const auto& pr = all[i];
      t.row(static_cast<Eigen::Index>(i)) << static_cast<double>(pr.point_index),
          static_cast<double>(pr.camera_index), pr.u, pr.v, pr.depth;
    }
    write_tensor(a->out, t);
    return json{{"points", cloud.size()},
                {"projections", all.size()},
                {"per_camera", per_camera},
                {"output", file_entry(a->out)}};
  };
}

void add_superpoints(CLI::App& root, CommandList& list) {
  struct Args {
    std::string cloud;
    std::vector<std::string> calib;
    std::vector<std::string> map;
    std::string out;
  };
  auto a = std::make_shared<Args>();
  Command& c = new_command(root, list, "superpoints",
                           "Group points by the superpixel they project into");
  c.params->add("cloud", a->cloud, "FPT1 point cloud");
  c.params->add("calib", a->calib, "Calibration JSON per camera");
  c.params->add("map", a->map, "FPT1 superpixel label map per camera");
  c.params->add("out", a->out, "Output FPT1 superpoint index");
  c.run = [a] {
    if (a->cloud.empty() || a->calib.empty() || a->out.empty())
      throw UsageError("superpoints: --cloud, --calib, --map and --out are required");
    const PointCloud cloud = read_cloud(a->cloud);
    const auto cams = read_cameras(a->calib);
    const SuperpointIndex index = build_superpoints(cloud, cams, read_maps(a->map, cams.size()));
    write_superpoints(a->out, index);
    std::size_t assigned = 0;
    for (std::size_t m = 0; m < index.region_count(); ++m) assigned += index.members(m).size();
    return json{{"points", cloud.size()},
                {"regions", index.region_count()},
                {"assigned_points", assigned},
                {"output", file_entry(a->out)}};
  };
}

void add_align_views(CLI::App& root, CommandList& list) {
  struct Args {
    std::string cloud;
    std::vector<std::string> calib;
    std::vector<std::string> map;
    std::string out;
  };
  auto a = std::make_shared<Args>();
  Command& c = new_command(root, list, "align-views",
                           "Unify class maps of instances seen by several cameras");
  c.params->add("cloud", a->cloud, "FPT1 point cloud linking the views");
  c.params->add("calib", a->calib, "Calibration JSON per camera");
  c.params->add("map", a->map, "FPT1 class map per camera");
  c.params->add("out", a->out, "Output directory for aligned_<j>.fpt");
  c.run = [a] {
    if (a->cloud.empty() || a->calib.empty() || a->out.empty())
      throw UsageError("align-views: --cloud, --calib, --map and --out are required");
    const PointCloud cloud = read_cloud(a->cloud);
    const auto cams = read_cameras(a->calib);
    const auto maps = read_maps(a->map, cams.size());
    const ViewAlignment va = align_views(maps, cloud, cams);
    fs::create_directories(a->out);
    json outputs = json::array();
    for (std::size_t j = 0; j < va.maps.size(); ++j) {
      const fs::path path = fs::path(a->out) / ("aligned_" + std::to_string(j) + ".fpt");
      write_label_map(path, va.maps[j]);
      outputs.push_back(file_entry(path));
    }
    return json{{"conflicts_before", count_view_conflicts(maps, cloud, cams)},
                {"conflicts_after", count_view_conflicts(va.maps, cloud, cams)},
                {"conflict_sets", va.conflict_sets},
                {"relabeled_instances", va.relabeled_regions},
                {"outputs", outputs}};
  };
}

void add_aggregate(CLI::App& root, CommandList& list) {
  struct Args {
    std::string keyframe;
    std::vector<std::string> sweep;
    std::string poses;
    std::vector<std::uint64_t> pose_rows;
    std::string out;
  };
  auto a = std::make_shared<Args>();
  Command& c = new_command(root, list, "aggregate",
                           "Merge sweeps into the keyframe frame (provenance appended)");
  c.params->add("keyframe", a->keyframe, "FPT1 keyframe cloud");
  c.params->add("sweep", a->sweep, "FPT1 sweep clouds");
  c.params->add("poses", a->poses, "Pose file (sensor -> world per row)");
  c.params->add("pose-rows", a->pose_rows,
                "Pose rows of the keyframe then each sweep (default 0, 1, ...)");
  c.params->add("out", a->out, "Output FPT1 cloud");
  c.run = [a] {
    if (a->keyframe.empty() || a->out.empty())
      throw UsageError("aggregate: --keyframe and --out are required");
    const PointCloud key = read_cloud(a->keyframe);
    std::vector<std::pair<PointCloud, RigidTransform>> sweeps;
    if (!a->sweep.empty()) {
      if (a->poses.empty()) throw UsageError("aggregate: --poses is required with --sweep");
      const auto poses = read_poses(a->poses);
      std::vector<std::uint64_t> rows = a->pose_rows;
      if (rows.empty())
        for (std::uint64_t i = 0; i <= a->sweep.size(); ++i) rows.push_back(i);
      if (rows.size() != a->sweep.size() + 1)
        throw UsageError("aggregate: --pose-rows needs one row for the keyframe and each sweep");
      for (auto r : rows)
        if (r >= poses.size())
          throw InvalidArgument("pose row " + std::to_string(r) + " out of range (" +
                                std::to_string(poses.size()) + " poses)");
      const RigidTransform world_to_key = poses[rows[0]].inverse();
      for (std::size_t s = 0; s < a->sweep.size(); ++s)
        sweeps.emplace_back(read_cloud(a->sweep[s]), compose(world_to_key, poses[rows[s + 1]]));
    }
    const PointCloud dense = aggregate_sweeps(key, sweeps);
    write_cloud(a->out, dense);
    return json{{"keyframe_points", key.size()},
                {"sweeps", sweeps.size()},
                {"points", dense.size()},
                {"output", file_entry(a->out)}};
  };
}

}  // namespace

void add_scene_commands(CLI::App& root, CommandList& list) {
  add_gen_scene(root, list);
  add_project(root, list);
  add_superpoints(root, list);
  add_align_views(root, list);
  add_aggregate(root, list);
}

}  // namespace fpt::cli
