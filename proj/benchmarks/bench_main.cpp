#include <benchmark/benchmark.h>

#include <cmath>

#include "fpt/kdtree.hpp"
#include "fpt/losses.hpp"
#include "fpt/pipeline.hpp"
#include "fpt/rng.hpp"
#include "fpt/scene.hpp"
#include "fpt/superpoints.hpp"
#include "fpt/temporal_vote.hpp"
#include "fpt/trainer.hpp"

namespace {

using namespace fpt;

CoordMatrix random_coords(Rng& rng, Eigen::Index n, double extent) {
  CoordMatrix c(n, 3);
  for (Eigen::Index i = 0; i < n; ++i)
    for (int j = 0; j < 3; ++j) c(i, j) = rng.uniform(-extent, extent);
  return c;
}

ScoreMatrix random_scores(Rng& rng, Eigen::Index n, Eigen::Index classes) {
  ScoreMatrix s(n, classes);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < classes; ++j) s(i, j) = rng.uniform() + 1e-3;
    s.row(i) /= s.row(i).sum();
  }
  return s;
}

RowMatrixXd unit_rows(Rng& rng, Eigen::Index m, Eigen::Index c) {
  RowMatrixXd x(m, c);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < c; ++j) x(i, j) = rng.normal();
  return normalize_rows(x);
}

void BM_KdTreeBuild(benchmark::State& state) {
  Rng rng(1);
  const CoordMatrix pts = random_coords(rng, state.range(0), 50.0);
  for (auto _ : state) benchmark::DoNotOptimize(NeighborIndex(pts));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_KdTreeBuild)->Arg(1 << 10)->Arg(1 << 14)->Arg(1 << 17);

void BM_KdTreeQuery(benchmark::State& state) {
  Rng rng(2);
  const CoordMatrix pts = random_coords(rng, state.range(0), 50.0);
  const NeighborIndex index(pts);
  const CoordMatrix queries = random_coords(rng, 1024, 50.0);
  for (auto _ : state)
    for (Eigen::Index i = 0; i < queries.rows(); ++i)
      benchmark::DoNotOptimize(index.nearest(queries.row(i).transpose()));
  state.SetItemsProcessed(state.iterations() * queries.rows());
}
BENCHMARK(BM_KdTreeQuery)->Arg(1 << 10)->Arg(1 << 14)->Arg(1 << 17);

void BM_TemporalVote(benchmark::State& state) {
  Rng rng(3);
  const Eigen::Index n = state.range(0);
  const PointCloud a(random_coords(rng, n, 30.0)), b(random_coords(rng, n, 30.0)),
      c(random_coords(rng, n, 30.0));
  const SemanticScores sa(random_scores(rng, n, 16), true), sb(random_scores(rng, n, 16), true),
      sc(random_scores(rng, n, 16), true);
  const RigidTransform id;
  for (auto _ : state) benchmark::DoNotOptimize(temporal_vote({a, sa, id}, {b, sb, id}, {c, sc, id}));
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_TemporalVote)->Arg(1 << 12)->Arg(1 << 15)->Unit(benchmark::kMillisecond);

void BM_InfoNce(benchmark::State& state) {
  Rng rng(4);
  const auto q = EmbeddingMatrix::from_normalized(unit_rows(rng, state.range(0), 64));
  const auto k = EmbeddingMatrix::from_normalized(unit_rows(rng, state.range(0), 64));
  for (auto _ : state) benchmark::DoNotOptimize(info_nce(q, k, kDefaultTemperature));
}
BENCHMARK(BM_InfoNce)->Arg(64)->Arg(256)->Arg(1024);

void BM_PoolByGroup(benchmark::State& state) {
  Rng rng(5);
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  std::vector<std::uint32_t> group(n);
  for (std::size_t i = 0; i < n; ++i) group[i] = static_cast<std::uint32_t>(i % 256);
  const SuperpointIndex index(group, std::vector<RegionMeta>(256));
  RowMatrix feats(static_cast<Eigen::Index>(n), 64);
  for (Eigen::Index i = 0; i < feats.size(); ++i) feats.data()[i] = rng.normal();
  for (auto _ : state) benchmark::DoNotOptimize(pool_by_group(feats, index));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_PoolByGroup)->Arg(1 << 14)->Arg(1 << 17);

void BM_TrainStep(benchmark::State& state) {
  const SyntheticScene scene = generate_scene(0);
  const PreparedBatch batch = prepare_batch(make_train_batch(scene));
  TrainConfig cfg;
  TrainState s = init_train_state(cfg, static_cast<int>(batch.frames[1].points.rows.cols()),
                                  static_cast<int>(scene.config.feature_channels));
  for (auto _ : state) s = train_step(s, batch).first;
  state.SetLabel(std::to_string(batch.frames[1].index.region_count()) + " keyframe regions");
}
BENCHMARK(BM_TrainStep)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
