#include "fpt/trainer.hpp"

#include <cmath>
#include <string>

#include "fpt/error.hpp"
#include "fpt/rng.hpp"

namespace fpt {

// ---------------------------------------------------------------------------
// Model

std::vector<std::pair<std::string, RowMatrixXd*>> Model::parameters() {
  return {{"encoder.w1", &encoder.w1},        {"encoder.b1", &encoder.b1},
          {"encoder.w2", &encoder.w2},        {"encoder.b2", &encoder.b2},
          {"point_head.weight", &point_head.weight}, {"image_head.weight", &image_head.weight}};
}

std::vector<std::pair<std::string, const RowMatrixXd*>> Model::parameters() const {
  std::vector<std::pair<std::string, const RowMatrixXd*>> out;
  for (auto& [name, p] : const_cast<Model*>(this)->parameters()) out.emplace_back(name, p);
  return out;
}

std::size_t Model::parameter_count() const {
  std::size_t n = 0;
  for (const auto& [name, p] : parameters()) n += static_cast<std::size_t>(p->size());
  return n;
}

Model Model::zeros_like() const {
  Model z = *this;
  for (auto& [name, p] : z.parameters()) p->setZero();
  return z;
}

Model init_model(int input_width, int image_channels, const ModelConfig& config, std::uint64_t seed) {
  if (input_width < 3 || image_channels < 1 || config.hidden < 1 || config.feature_dim < 1 ||
      config.embed_dim < 1)
    throw InvalidArgument("model dimensions must be positive (input width >= 3)");
  Rng rng(seed);
  auto uniform = [&](Eigen::Index rows, Eigen::Index cols, Eigen::Index fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    RowMatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-bound, bound);
    return m;
  };
  Model m;
  m.encoder.w1 = uniform(input_width, config.hidden, input_width);
  m.encoder.b1 = uniform(1, config.hidden, input_width);
  m.encoder.w2 = uniform(config.hidden, config.feature_dim, config.hidden);
  m.encoder.b2 = uniform(1, config.feature_dim, config.hidden);
  m.point_head.weight = uniform(config.feature_dim, config.embed_dim, config.feature_dim);
  m.image_head.weight = uniform(image_channels, config.embed_dim, image_channels);
  return m;
}

TrainState init_train_state(const TrainConfig& config, int input_width, int image_channels) {
  if (!(config.tau > 0.0)) throw InvalidArgument("temperature must be positive");
  if (!(config.lr >= 0.0)) throw InvalidArgument("learning rate must be non-negative");
  TrainState s;
  s.model = init_model(input_width, image_channels, config.model, config.seed);
  s.seed = config.seed;
  s.lr = config.lr;
  s.tau = config.tau;
  s.weights = config.weights;
  return s;
}

// ---------------------------------------------------------------------------
// Batch preparation

namespace {

GroupedRows group_points(const RowMatrixXd& inputs, const SuperpointIndex& index) {
  GroupedRows g;
  Eigen::Index total = 0;
  for (std::size_t m = 0; m < index.region_count(); ++m)
    total += static_cast<Eigen::Index>(index.members(m).size());
  g.rows.resize(total, inputs.cols());
  Eigen::Index row = 0;
  for (std::size_t m = 0; m < index.region_count(); ++m) {
    for (std::size_t i : index.members(m)) g.rows.row(row++) = inputs.row(static_cast<Eigen::Index>(i));
    g.offsets.push_back(row);
  }
  return g;
}

GroupedRows group_pixels(const FrameInputs& frame, const SuperpointIndex& index) {
  GroupedRows g;
  std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> pixels(index.region_count());
  Eigen::Index total = 0;
  for (std::size_t m = 0; m < index.region_count(); ++m) {
    const auto& meta = index.meta(m);
    const LabelMap& map = frame.maps[meta.camera];
    for (std::uint32_t y = 0; y < map.height(); ++y)
      for (std::uint32_t x = 0; x < map.width(); ++x)
        if (map.at(x, y) == meta.superpixel) pixels[m].emplace_back(x, y);
    total += static_cast<Eigen::Index>(pixels[m].size());
  }
  const auto channels = frame.features.empty() ? 0 : frame.features.front().channels();
  g.rows.resize(total, channels);
  Eigen::Index row = 0;
  for (std::size_t m = 0; m < index.region_count(); ++m) {
    const auto cam = index.meta(m).camera;
    const auto& intr = frame.cameras[cam].intrinsics;
    for (const auto& [x, y] : pixels[m])
      upsample_pixel(frame.features[cam], intr.width(), intr.height(), x, y,
                     g.rows.row(row++).data());
    g.offsets.push_back(row);
  }
  return g;
}

void check_frame(const FrameInputs& frame, std::size_t which, std::uint32_t& channels) {
  const auto n = frame.cameras.size();
  if (frame.maps.size() != n || frame.features.size() != n)
    throw InvalidArgument("frame " + std::to_string(which) +
                          ": cameras, label maps and feature maps differ in count");
  for (const auto& f : frame.features) {
    if (channels == 0) channels = f.channels();
    if (f.channels() != channels)
      throw InvalidArgument("feature maps disagree on channel count");
  }
}

}  // namespace

PreparedBatch prepare_batch(const TrainBatch& batch) {
  PreparedBatch out;
  std::uint32_t channels = 0;
  for (std::size_t f = 0; f < 3; ++f) {
    const FrameInputs& frame = batch.frames[f];
    check_frame(frame, f, channels);
    PreparedFrame& pf = out.frames[f];
    pf.index = build_superpoints(frame.cloud, frame.cameras, frame.maps);
    pf.points = group_points(point_inputs(frame.cloud), pf.index);
    pf.pixels = group_pixels(frame, pf.index);
  }
  const FrameInputs& key = batch.frames[1];
  const PointCloud dense =
      aggregate_sweeps(key.cloud, batch.sweeps).without_attr(key.cloud.attr_width());
  out.dense_index = build_superpoints(dense, key.cameras, key.maps);
  out.dense_points = group_points(point_inputs(dense), out.dense_index);

  out.temporal_matches[0] = match_regions(out.frames[1].index, out.frames[2].index);
  out.temporal_matches[1] = match_regions(out.frames[1].index, out.frames[0].index);
  out.d2s_matches = match_regions(out.dense_index, out.frames[1].index);
  return out;
}

// ---------------------------------------------------------------------------
// Forward / backward

namespace {

struct BranchPass {
  RowMatrixXd a1, h, f;  // point branch intermediates
  RowMatrixXd z;         // head output per row
  RowMatrixXd pooled;    // per-group mean of normalized z
  RowMatrixXd emb;       // normalized pooled rows
};

RowMatrixXd pool_groups(const RowMatrixXd& y, const std::vector<Eigen::Index>& offsets) {
  RowMatrixXd out = RowMatrixXd::Zero(static_cast<Eigen::Index>(offsets.size() - 1), y.cols());
  for (std::size_t m = 0; m + 1 < offsets.size(); ++m) {
    const Eigen::Index begin = offsets[m];
    const Eigen::Index count = offsets[m + 1] - begin;
    auto row = out.row(static_cast<Eigen::Index>(m));
    for (Eigen::Index r = begin; r < begin + count; ++r) row += y.row(r);
    row /= static_cast<double>(count);
  }
  return out;
}

RowMatrixXd pool_groups_backward(const RowMatrixXd& grad_pooled,
                                 const std::vector<Eigen::Index>& offsets) {
  RowMatrixXd out(offsets.back(), grad_pooled.cols());
  for (std::size_t m = 0; m + 1 < offsets.size(); ++m) {
    const Eigen::Index begin = offsets[m];
    const Eigen::Index count = offsets[m + 1] - begin;
    const Eigen::RowVectorXd g = grad_pooled.row(static_cast<Eigen::Index>(m)) / static_cast<double>(count);
    for (Eigen::Index r = begin; r < begin + count; ++r) out.row(r) = g;
  }
  return out;
}

void finish_branch(BranchPass& pass, const GroupedRows& g) {
  pass.pooled = pool_groups(normalize_rows(pass.z), g.offsets);
  pass.emb = normalize_rows(pass.pooled);
}

BranchPass forward_points(const Model& model, const GroupedRows& g) {
  BranchPass pass;
  pass.a1 = g.rows * model.encoder.w1;
  pass.a1.rowwise() += model.encoder.b1.row(0);
  pass.h = pass.a1.cwiseMax(0.0);
  pass.f = pass.h * model.encoder.w2;
  pass.f.rowwise() += model.encoder.b2.row(0);
  pass.z = pass.f * model.point_head.weight;
  finish_branch(pass, g);
  return pass;
}

BranchPass forward_pixels(const Model& model, const GroupedRows& g) {
  BranchPass pass;
  pass.z = g.rows * model.image_head.weight;
  finish_branch(pass, g);
  return pass;
}

RowMatrixXd backward_to_head(const BranchPass& pass, const GroupedRows& g,
                             const RowMatrixXd& grad_emb) {
  const RowMatrixXd grad_pooled = normalize_rows_backward(pass.pooled, grad_emb);
  return normalize_rows_backward(pass.z, pool_groups_backward(grad_pooled, g.offsets));
}

void backward_points(const Model& model, const GroupedRows& g, const BranchPass& pass,
                     const RowMatrixXd& grad_emb, Model& grad) {
  const RowMatrixXd dz = backward_to_head(pass, g, grad_emb);
  grad.point_head.weight += pass.f.transpose() * dz;
  const RowMatrixXd df = dz * model.point_head.weight.transpose();
  grad.encoder.w2 += pass.h.transpose() * df;
  grad.encoder.b2 += df.colwise().sum();
  RowMatrixXd da1 = df * model.encoder.w2.transpose();
  da1 = (pass.a1.array() > 0.0).select(da1, 0.0);
  grad.encoder.w1 += g.rows.transpose() * da1;
  grad.encoder.b1 += da1.colwise().sum();
}

void backward_pixels(const GroupedRows& g, const BranchPass& pass, const RowMatrixXd& grad_emb,
                     Model& grad) {
  grad.image_head.weight += g.rows.transpose() * backward_to_head(pass, g, grad_emb);
}

using Matches = std::vector<std::pair<std::uint32_t, std::uint32_t>>;

RowMatrixXd gather(const RowMatrixXd& m, const Matches& matches, bool first) {
  RowMatrixXd out(static_cast<Eigen::Index>(matches.size()), m.cols());
  for (std::size_t i = 0; i < matches.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) = m.row(first ? matches[i].first : matches[i].second);
  return out;
}

void scatter_add(RowMatrixXd& target, const RowMatrixXd& rows, const Matches& matches, bool first) {
  for (std::size_t i = 0; i < matches.size(); ++i)
    target.row(first ? matches[i].first : matches[i].second) += rows.row(static_cast<Eigen::Index>(i));
}

std::optional<LossPair> make_pair(const RowMatrixXd& a, const RowMatrixXd& b) {
  if (a.rows() == 0) return std::nullopt;
  return LossPair{EmbeddingMatrix::from_normalized(a), EmbeddingMatrix::from_normalized(b)};
}

constexpr const char* kSpatialNames[3] = {"spatial[t-dt]", "spatial[t]", "spatial[t+dt]"};
constexpr const char* kTemporalNames[2] = {"temporal[t,t+dt]", "temporal[t,t-dt]"};
constexpr const char* kCrossNames[2] = {"cross[t,t+dt]", "cross[t,t-dt]"};

}  // namespace

Evaluation evaluate(const Model& model, const PreparedBatch& batch, double tau,
                    const LossWeights& weights, bool with_gradient) {
  std::array<BranchPass, 3> q;
  std::array<BranchPass, 3> k;
  for (std::size_t f = 0; f < 3; ++f) {
    q[f] = forward_points(model, batch.frames[f].points);
    k[f] = forward_pixels(model, batch.frames[f].pixels);
  }
  const BranchPass qd = forward_points(model, batch.dense_points);

  // Frames are ordered (t-dt, t, t+dt); neighbour n of the keyframe is frame
  // 2 for n = 0 and frame 0 for n = 1.
  constexpr std::size_t kNeighbour[2] = {2, 0};
  ObjectiveInputs in;
  for (std::size_t f = 0; f < 3; ++f) in.spatial[f] = make_pair(q[f].emb, k[f].emb);
  for (std::size_t n = 0; n < 2; ++n) {
    const Matches& mt = batch.temporal_matches[n];
    const RowMatrixXd qt = gather(q[1].emb, mt, true);
    in.temporal[n] = make_pair(qt, gather(q[kNeighbour[n]].emb, mt, false));
    in.cross[n] = make_pair(qt, gather(k[kNeighbour[n]].emb, mt, false));
  }
  in.d2s = make_pair(gather(qd.emb, batch.d2s_matches, true),
                     gather(q[1].emb, batch.d2s_matches, false));

  const ObjectiveResult obj = composite_objective(in, tau, weights);

  Evaluation out;
  out.loss.total = obj.total;
  out.loss.spatial = obj.spatial;
  out.loss.temporal = obj.temporal;
  out.loss.cross = obj.cross;
  out.loss.d2s = obj.d2s;
  for (std::size_t f = 0; f < 3; ++f)
    if (!obj.spatial_terms[f].present) out.loss.missing.emplace_back(kSpatialNames[f]);
  for (std::size_t n = 0; n < 2; ++n) {
    if (!obj.temporal_terms[n].present) out.loss.missing.emplace_back(kTemporalNames[n]);
    if (!obj.cross_terms[n].present) out.loss.missing.emplace_back(kCrossNames[n]);
  }
  if (!obj.d2s_term.present) out.loss.missing.emplace_back("d2s");
  if (!with_gradient) return out;

  std::array<RowMatrixXd, 3> dq;
  std::array<RowMatrixXd, 3> dk;
  for (std::size_t f = 0; f < 3; ++f) {
    dq[f] = RowMatrixXd::Zero(q[f].emb.rows(), q[f].emb.cols());
    dk[f] = RowMatrixXd::Zero(k[f].emb.rows(), k[f].emb.cols());
    if (obj.spatial_terms[f].present) {
      dq[f] += obj.spatial_terms[f].grad_a;
      dk[f] += obj.spatial_terms[f].grad_b;
    }
  }
  for (std::size_t n = 0; n < 2; ++n) {
    const Matches& mt = batch.temporal_matches[n];
    if (obj.temporal_terms[n].present) {
      scatter_add(dq[1], obj.temporal_terms[n].grad_a, mt, true);
      scatter_add(dq[kNeighbour[n]], obj.temporal_terms[n].grad_b, mt, false);
    }
    if (obj.cross_terms[n].present) {
      scatter_add(dq[1], obj.cross_terms[n].grad_a, mt, true);
      scatter_add(dk[kNeighbour[n]], obj.cross_terms[n].grad_b, mt, false);
    }
  }
  RowMatrixXd dqd = RowMatrixXd::Zero(qd.emb.rows(), qd.emb.cols());
  if (obj.d2s_term.present) {
    scatter_add(dqd, obj.d2s_term.grad_a, batch.d2s_matches, true);
    scatter_add(dq[1], obj.d2s_term.grad_b, batch.d2s_matches, false);
  }

  out.grad = model.zeros_like();
  for (std::size_t f = 0; f < 3; ++f) {
    if (q[f].emb.rows() == 0) continue;
    backward_points(model, batch.frames[f].points, q[f], dq[f], out.grad);
    backward_pixels(batch.frames[f].pixels, k[f], dk[f], out.grad);
  }
  if (qd.emb.rows() > 0) backward_points(model, batch.dense_points, qd, dqd, out.grad);
  return out;
}

std::pair<TrainState, LossBreakdown> train_step(const TrainState& state,
                                                const PreparedBatch& batch) {
  Evaluation eval = evaluate(state.model, batch, state.tau, state.weights, true);
  TrainState next = state;
  if (state.lr != 0.0) {
    auto params = next.model.parameters();
    auto grads = eval.grad.parameters();
    for (std::size_t i = 0; i < params.size(); ++i) *params[i].second -= state.lr * *grads[i].second;
  }
  ++next.step;
  return {std::move(next), std::move(eval.loss)};
}

AlignmentStats alignment_stats(const Model& model, const PreparedBatch& batch) {
  const BranchPass q = forward_points(model, batch.frames[1].points);
  const BranchPass k = forward_pixels(model, batch.frames[1].pixels);
  const RowMatrixXd sim = q.emb * k.emb.transpose();
  const Eigen::Index m = sim.rows();
  AlignmentStats s;
  if (m == 0) return s;
  s.matched = sim.diagonal().mean();
  if (m > 1) s.mismatched = (sim.sum() - sim.diagonal().sum()) / static_cast<double>(m * (m - 1));
  return s;
}

}  // namespace fpt
