#include <gtest/gtest.h>
#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "fpt/error.hpp"
#include "fpt/gradcheck.hpp"
#include "fpt/pipeline.hpp"
#include "fpt/scene.hpp"
#include "fpt/trainer.hpp"

namespace fpt {
namespace {

namespace fs = std::filesystem;

// One prepared batch shared by the tests that need a real scene.
const PreparedBatch& scene_batch() {
  static const PreparedBatch batch = prepare_batch(make_train_batch(generate_scene(1)));
  return batch;
}

TrainState small_state(double lr) {
  TrainConfig cfg;
  cfg.lr = lr;
  cfg.seed = 3;
  cfg.model = {16, 16, 8};
  const auto& f = scene_batch().frames[1];
  return init_train_state(cfg, static_cast<int>(f.points.rows.cols()),
                          static_cast<int>(f.pixels.rows.cols()));
}

bool same_parameters(const Model& a, const Model& b) {
  const auto pa = a.parameters();
  const auto pb = b.parameters();
  if (pa.size() != pb.size()) return false;
  for (std::size_t i = 0; i < pa.size(); ++i)
    if (pa[i].first != pb[i].first || *pa[i].second != *pb[i].second) return false;
  return true;
}

TEST(Model, InitIsSeededAndBounded) {
  const ModelConfig cfg{8, 6, 4};
  const Model a = init_model(4, 5, cfg, 9);
  EXPECT_TRUE(same_parameters(a, init_model(4, 5, cfg, 9)));
  EXPECT_FALSE(same_parameters(a, init_model(4, 5, cfg, 10)));
  EXPECT_EQ(a.parameter_count(), 4u * 8 + 8 + 8 * 6 + 6 + 6 * 4 + 5 * 4);
  EXPECT_LE(a.encoder.w1.cwiseAbs().maxCoeff(), 1.0 / std::sqrt(4.0));
  EXPECT_LE(a.encoder.w2.cwiseAbs().maxCoeff(), 1.0 / std::sqrt(8.0));
  EXPECT_LE(a.image_head.weight.cwiseAbs().maxCoeff(), 1.0 / std::sqrt(5.0));
  std::vector<std::string> names;
  for (const auto& p : a.parameters()) names.push_back(p.first);
  EXPECT_EQ(names, (std::vector<std::string>{"encoder.w1", "encoder.b1", "encoder.w2", "encoder.b2",
                                             "point_head.weight", "image_head.weight"}));
}

TEST(TrainConfig, RejectsBadHyperparameters) {
  TrainConfig cfg;
  cfg.tau = 0.0;
  EXPECT_THROW(init_train_state(cfg, 4, 5), InvalidArgument);
  cfg = {};
  cfg.lr = -0.1;
  EXPECT_THROW(init_train_state(cfg, 4, 5), InvalidArgument);
  EXPECT_THROW(init_model(2, 5, ModelConfig{}, 0), InvalidArgument);
}

TEST(Pipeline, FrameOffsetFromTimespan) {
  EXPECT_EQ(frame_offset(0.5, 0.1), 5u);
  EXPECT_EQ(frame_offset(0.2, 0.1), 2u);
  EXPECT_THROW(frame_offset(0.55, 0.1), InvalidArgument);
  EXPECT_THROW(frame_offset(0.5, 0.0), InvalidArgument);
}

TEST(Pipeline, BatchUsesKeyframeAndRelativeSweepPoses) {
  const SyntheticScene scene = generate_scene(2);
  const TrainBatch b = make_train_batch(scene, 5, 5, 2);
  EXPECT_EQ(b.frames[0].cloud.coords(), scene.frames[0].cloud.coords());
  EXPECT_EQ(b.frames[1].cloud.coords(), scene.frames[5].cloud.coords());
  EXPECT_EQ(b.frames[2].cloud.coords(), scene.frames[10].cloud.coords());
  ASSERT_EQ(b.sweeps.size(), 2u);
  for (std::size_t s = 0; s < 2; ++s) {
    const auto& frame = scene.frames[4 - s];
    EXPECT_EQ(b.sweeps[s].first.coords(), frame.cloud.coords());
    // Sweep point -> world -> keyframe ego must agree with the stored transform.
    const Vec3 p = frame.cloud.point(0);
    const Vec3 via_world = scene.frames[5].ego_pose.inverse().apply(frame.ego_pose.apply(p));
    EXPECT_LT((b.sweeps[s].second.apply(p) - via_world).norm(), 1e-9);
  }
  EXPECT_THROW(make_train_batch(scene, 2, 5, 2), InvalidArgument);
}

TEST(PrepareBatch, ResolvesMatchesOnAScene) {
  const PreparedBatch& b = scene_batch();
  for (const auto& f : b.frames) {
    EXPECT_GT(f.index.region_count(), 0u);
    EXPECT_EQ(f.points.groups(), f.index.region_count());
    EXPECT_EQ(f.pixels.groups(), f.index.region_count());
  }
  EXPECT_FALSE(b.temporal_matches[0].empty());
  EXPECT_FALSE(b.temporal_matches[1].empty());
  EXPECT_FALSE(b.d2s_matches.empty());
  // The aggregated cloud holds the keyframe plus the sweeps.
  EXPECT_GT(b.dense_points.rows.rows(), b.frames[1].points.rows.rows());
}

TEST(TrainStep, ZeroLearningRateLeavesParametersUnchanged) {
  const TrainState s = small_state(0.0);
  const auto [next, loss] = train_step(s, scene_batch());
  EXPECT_TRUE(same_parameters(next.model, s.model));
  EXPECT_EQ(next.step, 1u);
  EXPECT_GT(loss.total, 0.0);
  EXPECT_TRUE(loss.missing.empty());
}

TEST(TrainStep, IsBitReproducibleAndReducesLoss) {
  TrainState a = small_state(0.1), b = small_state(0.1);
  double first = 0.0, last = 0.0;
  for (int i = 0; i < 15; ++i) {
    auto [na, la] = train_step(a, scene_batch());
    auto [nb, lb] = train_step(b, scene_batch());
    ASSERT_EQ(la.total, lb.total) << i;
    if (i == 0) first = la.total;
    last = la.total;
    a = std::move(na);
    b = std::move(nb);
  }
  EXPECT_TRUE(same_parameters(a.model, b.model));
  EXPECT_LT(last, first);
}

TEST(Evaluate, FlagsMissingTerms) {
  PreparedBatch b = random_prepared_batch(4, 5, 4, 3);
  b.temporal_matches[0].clear();
  b.d2s_matches.clear();
  const Model m = init_model(4, 3, ModelConfig{8, 6, 4}, 1);
  const Evaluation e = evaluate(m, b, 0.5, LossWeights{}, true);
  EXPECT_EQ(e.loss.missing,
            (std::vector<std::string>{"temporal[t,t+dt]", "cross[t,t+dt]", "d2s"}));
  EXPECT_EQ(e.loss.d2s, 0.0);
  EXPECT_TRUE(std::isfinite(e.loss.total));
}

TEST(GradCheck, ObjectiveAndKernels) {
  GradCheckConfig cfg;
  cfg.instances = 10;
  const GradCheckReport r = check_loss_gradients(cfg);
  EXPECT_FALSE(r.records.empty());
  EXPECT_LT(r.max_rel_error, 1e-5);
}

TEST(GradCheck, ModelParameters) {
  GradCheckConfig cfg;
  cfg.instances = 5;
  const GradCheckReport r = check_model_gradients(cfg);
  EXPECT_EQ(r.records.size(), 5u);
  EXPECT_LT(r.max_rel_error, 1e-5);
}

TEST(GradCheck, RelativeErrorConventions) {
  EXPECT_EQ(relative_error(Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(3)), 0.0);
  Eigen::VectorXd a(2), b(2);
  a << 1.0, 0.0;
  b << 1.0, 1e-3;
  EXPECT_NEAR(relative_error(a, b), 1e-3 / std::sqrt(1.0 + 1e-6), 1e-12);
}

TEST(Checkpoint, RoundTripIsExact) {
  const fs::path dir =
      fs::temp_directory_path() / ("fpt_test_checkpoint" + std::to_string(::getpid()));
  fs::remove_all(dir);
  TrainState s = small_state(0.1);
  s = train_step(s, scene_batch()).first;
  save_checkpoint(dir, s, "abc123");
  const TrainState back = load_checkpoint(dir);
  EXPECT_TRUE(same_parameters(back.model, s.model));
  EXPECT_EQ(back.step, 1u);
  EXPECT_EQ(back.seed, s.seed);
  EXPECT_EQ(back.lr, s.lr);
  EXPECT_EQ(back.tau, s.tau);

  // A manifest that disagrees with the payload is refused.
  std::ifstream in(dir / "checkpoint.json");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  in.close();
  const auto pos = text.find("fpt-checkpoint-1");
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos, 16, "fpt-checkpoint-9");
  std::ofstream(dir / "checkpoint.json") << text;
  EXPECT_THROW(load_checkpoint(dir), FormatError);
}

TEST(Alignment, TrainingSeparatesMatchedFromMismatched) {
  TrainState s = small_state(0.1);
  const AlignmentStats before = alignment_stats(s.model, scene_batch());
  for (int i = 0; i < 40; ++i) s = train_step(s, scene_batch()).first;
  const AlignmentStats after = alignment_stats(s.model, scene_batch());
  EXPECT_GT(after.matched - after.mismatched, before.matched - before.mismatched);
}

}  // namespace
}  // namespace fpt
