#include <gtest/gtest.h>
#include <unistd.h>

#include <cstring>
#include <filesystem>
#include <numbers>

#include "fpt/calibration.hpp"
#include "fpt/container.hpp"
#include "fpt/error.hpp"
#include "fpt/scene.hpp"
#include "fpt/superpoints.hpp"
#include "test_support.hpp"

namespace fpt {
namespace {

namespace fs = std::filesystem;

fs::path temp_dir(const std::string& name) {
  const fs::path dir =
      fs::temp_directory_path() / ("fpt_test_" + std::to_string(::getpid()) + "_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

ByteView view(const std::string& s) { return std::as_bytes(std::span(s)); }

// ---------------------------------------------------------------------------
// FPT1 container

TEST(Container, EmptyCloudRoundTrips) {
  const PointCloud empty;
  const PointCloud back = decode_cloud(encode_cloud(empty));
  EXPECT_EQ(back.size(), 0u);
  EXPECT_EQ(back.attr_width(), 0);
}

TEST(Container, RandomCloudRoundTripsBitExact) {
  Rng rng(1);
  const PointCloud cloud = testing::random_cloud(rng, 1000, 1, 50.0, 12.25);
  const Bytes bytes = encode_cloud(cloud);
  ASSERT_EQ(bytes.size(), kContainerHeaderSize + 8 + 1000 * 4 * 8);
  const PointCloud back = decode_cloud(bytes);
  EXPECT_EQ(back.coords(), cloud.coords());
  EXPECT_EQ(back.attrs(), cloud.attrs());
  EXPECT_EQ(back.timestamp(), cloud.timestamp());
  EXPECT_EQ(encode_cloud(back), bytes);
}

TEST(Container, HeaderLayoutIsLittleEndian) {
  const std::vector<std::uint32_t> labels{7, 8, 9};
  const Bytes b = encode_labels(labels);
  ASSERT_EQ(b.size(), 40u + 12u);
  EXPECT_EQ(std::memcmp(b.data(), "FPT1", 4), 0);
  EXPECT_EQ(static_cast<int>(b[4]), 5);  // Labels
  EXPECT_EQ(static_cast<int>(b[5]), 1);  // u32
  EXPECT_EQ(static_cast<int>(b[6]) | static_cast<int>(b[7]), 0);
  EXPECT_EQ(static_cast<int>(b[8]), 3);  // dims[0] = 3, low byte first
  for (int i = 9; i < 40; ++i) EXPECT_EQ(static_cast<int>(b[i]), 0) << i;
  EXPECT_EQ(static_cast<int>(b[40]), 7);
}

TEST(Container, EveryKindRoundTrips) {
  Rng rng(2);
  LabelMap map(5, 3);
  for (std::uint32_t y = 0; y < 3; ++y)
    for (std::uint32_t x = 0; x < 5; ++x) map.set(x, y, rng.below(4) == 0 ? kUnlabeled : rng.below(9));
  EXPECT_EQ(decode_label_map(encode_label_map(map)), map);

  std::vector<double> fdata(4 * 2 * 3);
  for (double& v : fdata) v = rng.normal();
  const FeatureMap fm(4, 2, 3, fdata);
  const FeatureMap fback = decode_feature_map(encode_feature_map(fm));
  EXPECT_EQ(fback.width(), 4u);
  EXPECT_EQ(fback.height(), 2u);
  EXPECT_EQ(fback.channels(), 3u);
  EXPECT_EQ(fback.data(), fdata);

  for (bool prob : {false, true}) {
    const SemanticScores s(testing::random_simplex_rows(rng, 9, 4), prob);
    const SemanticScores back = decode_scores(encode_scores(s));
    EXPECT_EQ(back.data(), s.data());
    EXPECT_EQ(back.probabilities(), prob);
  }

  const std::vector<std::uint32_t> labels{0, 5, 2, 0xFFFFFFFFu};
  EXPECT_EQ(decode_labels(encode_labels(labels)), labels);

  TensorMatrix t = TensorMatrix::Random(3, 7);
  EXPECT_EQ(decode_tensor(encode_tensor(t)), t);

  const SuperpointIndex idx({0, SuperpointIndex::kNone, 1, 0}, {{0, 12, 40}, {2, 3, 7}});
  EXPECT_EQ(decode_superpoints(encode_superpoints(idx)), idx);
}

TEST(Container, RejectsCorruptMagic) {
  Bytes b = encode_labels(std::vector<std::uint32_t>{1});
  b[0] = std::byte{'X'};
  EXPECT_THROW(decode_labels(b), FormatError);
}

TEST(Container, RejectsOtherVersion) {
  Bytes b = encode_labels(std::vector<std::uint32_t>{1});
  b[3] = std::byte{'2'};
  try {
    decode_labels(b);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("version"), std::string::npos);
  }
}

TEST(Container, RejectsBadTagsAndReserved) {
  const Bytes good = encode_labels(std::vector<std::uint32_t>{1});
  Bytes b = good;
  b[4] = std::byte{99};
  EXPECT_THROW(peek_header(b), FormatError);
  b = good;
  b[5] = std::byte{7};
  EXPECT_THROW(peek_header(b), FormatError);
  b = good;
  b[6] = std::byte{1};
  EXPECT_THROW(peek_header(b), FormatError);
  b = good;
  b[16] = std::byte{1};  // dims[1] unused for Labels
  EXPECT_THROW(decode_labels(b), FormatError);
}

TEST(Container, RejectsKindMismatch) {
  EXPECT_THROW(decode_cloud(encode_labels(std::vector<std::uint32_t>{1})), FormatError);
}

TEST(Container, RejectsTruncationAndTrailingBytes) {
  const Bytes good = encode_tensor(TensorMatrix::Ones(2, 2));
  EXPECT_THROW(decode_tensor(ByteView(good).first(good.size() - 1)), FormatError);
  EXPECT_THROW(decode_tensor(ByteView(good).first(20)), FormatError);
  Bytes longer = good;
  longer.push_back(std::byte{0});
  EXPECT_THROW(decode_tensor(longer), FormatError);
}

TEST(Container, RejectsDimensionOverflow) {
  Bytes b = encode_tensor(TensorMatrix::Ones(1, 1));
  // dims[0] = 2^62 rows of one column: byte count overflows 64 bits.
  for (int i = 0; i < 8; ++i) b[8 + i] = std::byte{0};
  b[15] = std::byte{0x40};
  EXPECT_THROW(decode_tensor(b), FormatError);
}

TEST(Container, FilesRoundTrip) {
  const fs::path dir = temp_dir("container_files");
  Rng rng(3);
  const PointCloud cloud = testing::random_cloud(rng, 20, 2);
  write_cloud(dir / "c.fpt", cloud);
  EXPECT_EQ(read_cloud(dir / "c.fpt").coords(), cloud.coords());
  EXPECT_THROW(read_cloud(dir / "missing.fpt"), FormatError);
}

TEST(Container, Fnv1aKnownVectors) {
  EXPECT_EQ(fnv1a64(view("")), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64(view("a")), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(fnv1a64(view("foobar")), 0x85944171f73967e8ULL);
}

// ---------------------------------------------------------------------------
// Scene value types

TEST(SemanticScores, ValidatesProbabilityRows) {
  ScoreMatrix s(2, 2);
  s << 0.5, 0.5, 0.7, 0.2;
  EXPECT_THROW(SemanticScores(s, true), InvalidArgument);
  EXPECT_NO_THROW(SemanticScores(s, false));
  s(1, 1) = 0.3;
  EXPECT_NO_THROW(SemanticScores(s, true));
  s << 1.2, -0.2, 0.5, 0.5;
  EXPECT_THROW(SemanticScores(s, true), InvalidArgument);
}

TEST(SemanticScores, ArgmaxTiesPickLowestClass) {
  ScoreMatrix s(3, 3);
  s << 0.2, 0.4, 0.4, 0.5, 0.5, 0.0, 0.1, 0.1, 0.8;
  EXPECT_EQ(argmax_labels(SemanticScores(s, true)), (std::vector<std::uint32_t>{1, 0, 2}));
}

// ---------------------------------------------------------------------------
// Calibration and pose files

CalibratedCamera sample_camera() {
  Mat3 k;
  k << 101.25, 0, 63.5, 0, 99.75, 47.5, 0, 0, 1;
  Rng rng(4);
  return {CameraIntrinsics(k, 128, 96), testing::random_transform(rng)};
}

TEST(Calibration, RoundTripIsBitExact) {
  const CalibratedCamera cam = sample_camera();
  const CalibratedCamera back = parse_calibration(format_calibration(cam));
  EXPECT_EQ(back.intrinsics.matrix(), cam.intrinsics.matrix());
  EXPECT_EQ(back.intrinsics.width(), 128u);
  EXPECT_EQ(back.intrinsics.height(), 96u);
  EXPECT_EQ(back.extrinsic.matrix(), cam.extrinsic.matrix());
}

TEST(Calibration, ParsesDocumentedFields) {
  const CalibratedCamera cam = parse_calibration(R"({
    "intrinsics": [100, 0, 64, 0, 100, 48, 0, 0, 1],
    "extrinsic": [1, 0, 0, 0.5, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1],
    "width": 128, "height": 96})");
  EXPECT_EQ(cam.intrinsics.matrix()(0, 2), 64.0);
  EXPECT_EQ(cam.extrinsic.translation(), Vec3(0.5, 0, 0));
}

TEST(Calibration, RejectsMalformedDocuments) {
  const std::string k = R"("intrinsics": [100, 0, 64, 0, 100, 48, 0, 0, 1])";
  const std::string e = R"("extrinsic": [1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1])";
  EXPECT_THROW(parse_calibration("{"), FormatError);
  EXPECT_THROW(parse_calibration("{" + k + ", \"width\": 4, \"height\": 4}"), FormatError);
  EXPECT_THROW(parse_calibration(R"({"intrinsics": [1, 2], )" + e + R"(, "width": 4, "height": 4})"),
               FormatError);
  EXPECT_THROW(parse_calibration("{" + k + ", " + e + R"(, "width": -4, "height": 4})"), FormatError);
  const std::string bad_bottom =
      R"("extrinsic": [1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 1, 1])";
  EXPECT_THROW(parse_calibration("{" + k + ", " + bad_bottom + R"(, "width": 4, "height": 4})"),
               FormatError);
  const std::string scaled =
      R"("extrinsic": [2, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1])";
  EXPECT_THROW(parse_calibration("{" + k + ", " + scaled + R"(, "width": 4, "height": 4})"),
               FormatError);
}

TEST(Poses, ParseSkipsCommentsAndRoundTrips) {
  Rng rng(5);
  const std::vector<RigidTransform> poses{testing::random_transform(rng), RigidTransform(),
                                          testing::random_transform(rng)};
  const std::string text = "# header\n\n" + format_poses(poses);
  const auto back = parse_poses(text);
  ASSERT_EQ(back.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(back[i].matrix(), poses[i].matrix());
}

TEST(Poses, RejectsShortLinesAndBadNumbers) {
  EXPECT_THROW(parse_poses("1 0 0 0 0 1 0 0 0 0 1 0 0 0 0\n"), FormatError);
  EXPECT_THROW(parse_poses("1 0 0 0 0 1 0 0 0 0 1 0 0 0 0 x\n"), FormatError);
}

// ---------------------------------------------------------------------------
// Synthetic scenes

TEST(Scene, RejectsDegenerateConfigs) {
  SceneConfig c;
  c.num_cameras = 0;
  EXPECT_THROW(generate_scene(0, c), InvalidArgument);
  c = {};
  c.num_frames = 0;
  EXPECT_THROW(generate_scene(0, c), InvalidArgument);
  c = {};
  c.num_objects = 0;
  EXPECT_THROW(generate_scene(0, c), InvalidArgument);
}

TEST(Scene, SameSeedGivesByteIdenticalScenes) {
  const fs::path a = temp_dir("scene_a"), b = temp_dir("scene_b");
  const auto files_a = write_scene(a, generate_scene(9));
  const auto files_b = write_scene(b, generate_scene(9));
  ASSERT_EQ(files_a.size(), files_b.size());
  for (std::size_t i = 0; i < files_a.size(); ++i)
    EXPECT_EQ(read_bytes(files_a[i]), read_bytes(files_b[i])) << files_a[i];
  const auto files_c = write_scene(temp_dir("scene_c"), generate_scene(10));
  EXPECT_NE(read_bytes(files_a[files_a.size() - 1]), read_bytes(files_c[files_c.size() - 1]));
}

TEST(Scene, WriteReadRoundTrip) {
  const SyntheticScene scene = generate_scene(4);
  const fs::path dir = temp_dir("scene_rt");
  write_scene(dir, scene);
  const SyntheticScene back = read_scene(dir);
  EXPECT_EQ(back.seed, scene.seed);
  EXPECT_EQ(scene_config_json(back.config), scene_config_json(scene.config));
  ASSERT_EQ(back.frames.size(), scene.frames.size());
  ASSERT_EQ(back.objects.size(), scene.objects.size());
  for (std::size_t i = 0; i < scene.objects.size(); ++i) {
    EXPECT_EQ(back.objects[i].center, scene.objects[i].center);
    EXPECT_EQ(back.objects[i].velocity, scene.objects[i].velocity);
  }
  for (std::size_t k = 0; k < scene.frames.size(); ++k) {
    const auto& f = scene.frames[k];
    const auto& g = back.frames[k];
    EXPECT_EQ(g.cloud.coords(), f.cloud.coords());
    EXPECT_EQ(g.cloud.attrs(), f.cloud.attrs());
    EXPECT_EQ(g.ego_pose.matrix(), f.ego_pose.matrix());
    EXPECT_EQ(g.point_class, f.point_class);
    EXPECT_EQ(g.point_instance, f.point_instance);
    EXPECT_EQ(g.instance_maps, f.instance_maps);
    EXPECT_EQ(g.class_maps, f.class_maps);
    for (std::size_t j = 0; j < f.features.size(); ++j)
      EXPECT_EQ(g.features[j].data(), f.features[j].data());
  }
}

TEST(Scene, ConfigJsonRoundTrip) {
  SceneConfig c;
  c.num_frames = 4;
  c.timestep = 0.25;
  c.point_noise = 0.125;
  EXPECT_EQ(scene_config_json(scene_config_from_json(scene_config_json(c))), scene_config_json(c));
  EXPECT_THROW(scene_config_from_json("{\"num_frames\": \"x\"}"), FormatError);
}

TEST(Scene, ProjectedPointsLandOnTheirOwnInstance) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const SyntheticScene scene = generate_scene(seed);
    for (const auto& frame : scene.frames) {
      ASSERT_EQ(frame.point_instance.size(), frame.cloud.size());
      for (std::uint32_t j = 0; j < scene.cameras.size(); ++j) {
        const auto& cam = scene.cameras[j];
        for (const auto& p : project_points(frame.cloud, cam.intrinsics, cam.extrinsic, j)) {
          const auto [x, y] = pixel_of(p);
          ASSERT_EQ(frame.instance_maps[j].at(x, y), frame.point_instance[p.point_index])
              << "seed " << seed << " camera " << j;
        }
      }
    }
  }
}

TEST(Scene, InstanceIdsAndClassesAreConsistentAcrossFrames) {
  const SyntheticScene scene = generate_scene(2);
  std::vector<std::uint32_t> class_of(scene.objects.size() + 1, kGroundClass);
  for (const auto& o : scene.objects) class_of[o.instance] = o.semantic_class;
  for (const auto& f : scene.frames)
    for (std::size_t i = 0; i < f.cloud.size(); ++i)
      EXPECT_EQ(f.point_class[i], class_of[f.point_instance[i]]);
}

TEST(Scene, FeatureStrideIsDataDriven) {
  const SyntheticScene scene = generate_scene(1);
  const auto& fm = scene.frames[0].features[0];
  EXPECT_EQ(scene.cameras[0].intrinsics.width() / fm.width(), scene.config.feature_stride);
  EXPECT_EQ(fm.channels(), scene.config.feature_channels);
}

// Distance from p to the surface of an oriented box standing on the ground.
double box_surface_distance(const SceneObject& o, double t, const Vec3& p) {
  const Vec3 c = o.center_at(t);
  const double cy = std::cos(-o.yaw), sy = std::sin(-o.yaw);
  const Vec3 d = p - c;
  const Vec3 q(cy * d.x() - sy * d.y(), sy * d.x() + cy * d.y(), d.z());
  const Vec3 h = o.size / 2.0;
  const Vec3 outside = (q.cwiseAbs() - h).cwiseMax(0.0);
  if (outside.norm() > 0.0) return outside.norm();
  return (h - q.cwiseAbs()).minCoeff();
}

TEST(Scene, StaticSceneOverlaysUnderRelativeEgoPose) {
  SceneConfig c;
  c.num_frames = 2;
  c.moving_fraction = 0.0;
  c.ego_yaw_rate_deg = 5.0;
  const SyntheticScene scene = generate_scene(3, c);
  const auto& f0 = scene.frames[0];
  const auto& f1 = scene.frames[1];
  // Frame-1 points mapped into frame 0's ego frame.
  const RigidTransform rel = compose(f0.ego_pose.inverse(), f1.ego_pose);
  const PointCloud mapped = transform_cloud(f1.cloud, rel);
  const double tol = 6.0 * c.point_noise;
  for (std::size_t i = 0; i < mapped.size(); ++i) {
    // Back to world with frame 0's pose: static geometry is where frame 0 saw it.
    const Vec3 w = f0.ego_pose.apply(mapped.point(i));
    const std::uint32_t inst = f1.point_instance[i];
    if (inst == kGroundInstance) {
      EXPECT_NEAR(w.z(), 0.0, tol);
    } else {
      EXPECT_LT(box_surface_distance(scene.objects[inst - 1], f0.timestamp, w), tol);
    }
  }
}

TEST(Scene, MovingObjectCentroidFollowsVelocity) {
  SceneConfig c;
  c.num_frames = 6;  // 0.5 s at 0.1 s steps
  c.ego_speed = 0.0;
  c.points_per_object = 2000;
  SceneObject o;
  o.instance = 1;
  o.semantic_class = 1;
  o.center = Vec3(12.0, 0.0, 0.8);
  o.size = Vec3(1.0, 1.0, 1.6);
  o.velocity = Vec3(1.0, 0.0, 0.0);
  const SyntheticScene scene = generate_scene(5, c, {o});
  auto centroid = [&](const SceneFrame& f) {
    Vec3 sum = Vec3::Zero();
    int n = 0;
    for (std::size_t i = 0; i < f.cloud.size(); ++i)
      if (f.point_instance[i] == 1) {
        sum += f.ego_pose.apply(f.cloud.point(i));
        ++n;
      }
    EXPECT_GT(n, 100);
    return Vec3(sum / n);
  };
  const Vec3 shift = centroid(scene.frames[5]) - centroid(scene.frames[0]);
  EXPECT_NEAR(shift.x(), 0.5, 0.05);
  EXPECT_NEAR(shift.y(), 0.0, 0.05);
  EXPECT_NEAR(shift.z(), 0.0, 0.05);
}

TEST(Scene, NoisyScoresAreSeededProbabilities) {
  const std::vector<std::uint32_t> labels{0, 1, 2, 3, 4, 5, 0, 1};
  const SemanticScores a = make_noisy_scores(labels, 6, 0.0, 7);
  const SemanticScores b = make_noisy_scores(labels, 6, 0.0, 7);
  EXPECT_TRUE(a.probabilities());
  EXPECT_EQ(a.data(), b.data());
  EXPECT_EQ(argmax_labels(a), labels);
  EXPECT_THROW(make_noisy_scores(std::vector<std::uint32_t>{6}, 6, 0.0, 7), InvalidArgument);
}

}  // namespace
}  // namespace fpt
