#include "fpt/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fpt/error.hpp"
#include "fpt/rng.hpp"

namespace fpt {

namespace {

RowMatrixXd random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  RowMatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

template <class Tensors>
Eigen::VectorXd flatten(const Tensors& tensors) {
  Eigen::Index n = 0;
  for (const RowMatrixXd* t : tensors) n += t->size();
  Eigen::VectorXd out(n);
  Eigen::Index k = 0;
  for (const RowMatrixXd* t : tensors)
    for (Eigen::Index i = 0; i < t->size(); ++i) out[k++] = t->data()[i];
  return out;
}

/// Central differences of f over every entry of the given tensors.
template <class F>
Eigen::VectorXd numeric_gradient(const std::vector<RowMatrixXd*>& tensors, F&& f, double h) {
  std::vector<double> out;
  for (RowMatrixXd* t : tensors) {
    for (Eigen::Index i = 0; i < t->size(); ++i) {
      double& x = t->data()[i];
      const double saved = x;
      x = saved + h;
      const double up = f();
      x = saved - h;
      const double down = f();
      x = saved;
      out.push_back((up - down) / (2.0 * h));
    }
  }
  return Eigen::Map<Eigen::VectorXd>(out.data(), static_cast<Eigen::Index>(out.size()));
}

// Objective operands in a fixed order.
enum Operand { kQ0, kQ1, kQ2, kK0, kK1, kK2, kQd, kOperands };

ObjectiveInputs objective_inputs(const std::array<RowMatrixXd, kOperands>& y) {
  auto pair = [&](int a, int b) {
    return std::optional<LossPair>(
        LossPair{EmbeddingMatrix::from_normalized(y[a]), EmbeddingMatrix::from_normalized(y[b])});
  };
  ObjectiveInputs in;
  in.spatial = {pair(kQ0, kK0), pair(kQ1, kK1), pair(kQ2, kK2)};
  in.temporal = {pair(kQ1, kQ2), pair(kQ1, kQ0)};
  in.cross = {pair(kQ1, kK2), pair(kQ1, kK0)};
  in.d2s = pair(kQd, kQ1);
  return in;
}

std::array<RowMatrixXd, kOperands> operand_grads(const ObjectiveResult& r, Eigen::Index m,
                                                 Eigen::Index c) {
  std::array<RowMatrixXd, kOperands> g;
  for (auto& x : g) x = RowMatrixXd::Zero(m, c);
  auto add = [&](const TermResult& t, int a, int b) {
    if (!t.present) return;
    g[a] += t.grad_a;
    g[b] += t.grad_b;
  };
  add(r.spatial_terms[0], kQ0, kK0);
  add(r.spatial_terms[1], kQ1, kK1);
  add(r.spatial_terms[2], kQ2, kK2);
  add(r.temporal_terms[0], kQ1, kQ2);
  add(r.temporal_terms[1], kQ1, kQ0);
  add(r.cross_terms[0], kQ1, kK2);
  add(r.cross_terms[1], kQ1, kK0);
  add(r.d2s_term, kQd, kQ1);
  return g;
}

void record(GradCheckReport& report, GradCheckRecord rec) {
  report.max_rel_error = std::max(report.max_rel_error, rec.rel_error);
  report.records.push_back(std::move(rec));
}

void check_config(const GradCheckConfig& config) {
  if (config.max_regions < 2 || config.max_dim < 2)
    throw InvalidArgument("gradient check needs max_regions >= 2 and max_dim >= 2");
  if (config.taus.empty()) throw InvalidArgument("gradient check needs at least one temperature");
  for (double tau : config.taus)
    if (!(tau > 0.0)) throw InvalidArgument("temperatures must be positive");
  if (!(config.step > 0.0)) throw InvalidArgument("finite-difference step must be positive");
}

}  // namespace

double relative_error(const Eigen::VectorXd& analytic, const Eigen::VectorXd& numeric) {
  const double scale = std::max(analytic.norm(), numeric.norm());
  return scale == 0.0 ? 0.0 : (analytic - numeric).norm() / scale;
}

GradCheckReport check_loss_gradients(const GradCheckConfig& config) {
  check_config(config);
  GradCheckReport report;
  const double h = config.step;
  for (std::size_t inst = 0; inst < config.instances; ++inst) {
    Rng rng(derive_seed(config.seed, inst));
    const auto m = static_cast<Eigen::Index>(2 + rng.below(config.max_regions - 1));
    const auto c = static_cast<Eigen::Index>(2 + rng.below(config.max_dim - 1));
    const double tau = config.taus[inst % config.taus.size()];
    auto rec = [&](std::string term, double err) {
      record(report, {std::move(term), inst, static_cast<std::size_t>(m),
                      static_cast<std::size_t>(c), tau, err});
    };

    // Raw kernels on unit rows; the perturbation leaves the sphere, which the
    // kernels accept.
    RowMatrixXd q = normalize_rows(random_matrix(rng, m, c));
    RowMatrixXd k = normalize_rows(random_matrix(rng, m, c));
    {
      const LossResult r = kernels::info_nce(q, k, tau);
      const Eigen::VectorXd num =
          numeric_gradient({&q, &k}, [&] { return kernels::info_nce(q, k, tau).value; }, h);
      rec("kernel.info_nce", relative_error(flatten(std::array{&r.grad_q, &r.grad_k}), num));
    }
    {
      const LossResult r = kernels::d2s(q, k);
      const Eigen::VectorXd num =
          numeric_gradient({&q, &k}, [&] { return kernels::d2s(q, k).value; }, h);
      rec("kernel.d2s", relative_error(flatten(std::array{&r.grad_q, &r.grad_k}), num));
    }

    // Objective terms through normalization of arbitrary operands.
    std::array<RowMatrixXd, kOperands> raw;
    for (auto& x : raw) x = random_matrix(rng, m, c);
    std::vector<RowMatrixXd*> ptrs;
    for (auto& x : raw) ptrs.push_back(&x);
    auto normalized = [&] {
      std::array<RowMatrixXd, kOperands> y;
      for (int i = 0; i < kOperands; ++i) y[i] = normalize_rows(raw[i]);
      return y;
    };
    const std::pair<const char*, LossWeights> terms[] = {
        {"objective.spatial", {1.0, 0.0, 0.0, 0.0}},
        {"objective.temporal", {0.0, 1.0, 0.0, 0.0}},
        {"objective.cross", {0.0, 0.0, 1.0, 0.0}},
        {"objective.d2s", {0.0, 0.0, 0.0, 1.0}},
    };
    for (const auto& [name, weights] : terms) {
      const ObjectiveResult r = composite_objective(objective_inputs(normalized()), tau, weights);
      const auto dy = operand_grads(r, m, c);
      std::array<RowMatrixXd, kOperands> dx;
      for (int i = 0; i < kOperands; ++i) dx[i] = normalize_rows_backward(raw[i], dy[i]);
      std::vector<const RowMatrixXd*> dptrs;
      for (auto& x : dx) dptrs.push_back(&x);
      const Eigen::VectorXd num = numeric_gradient(
          ptrs, [&] { return composite_objective(objective_inputs(normalized()), tau, weights).total; },
          h);
      rec(name, relative_error(flatten(dptrs), num));
    }
  }
  return report;
}

PreparedBatch random_prepared_batch(std::uint64_t seed, std::size_t regions, int input_width,
                                    int image_channels) {
  if (regions == 0) throw InvalidArgument("random batch needs at least one region");
  Rng rng(seed);
  auto grouped = [&](int width) {
    GroupedRows g;
    Eigen::Index total = 0;
    for (std::size_t m = 0; m < regions; ++m) {
      total += static_cast<Eigen::Index>(1 + rng.below(4));
      g.offsets.push_back(total);
    }
    g.rows = random_matrix(rng, total, width);
    return g;
  };
  PreparedBatch b;
  for (auto& f : b.frames) {
    f.points = grouped(input_width);
    f.pixels = grouped(image_channels);
  }
  b.dense_points = grouped(input_width);
  for (auto& matches : b.temporal_matches) {
    std::vector<std::uint32_t> perm(regions);
    std::iota(perm.begin(), perm.end(), 0u);
    for (std::size_t i = regions; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
    const std::size_t count = 1 + rng.below(regions);
    for (std::size_t i = 0; i < count; ++i)
      matches.emplace_back(static_cast<std::uint32_t>(i), perm[i]);
  }
  for (std::size_t i = 0; i < regions; ++i)
    b.d2s_matches.emplace_back(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i));
  return b;
}

namespace {

// Smallest |pre-activation| over every point branch relative to how far a
// step on one first-layer weight or bias can move it.
bool kink_in_reach(const Model& model, const PreparedBatch& b, double h) {
  auto check = [&](const GroupedRows& g) {
    if (g.rows.rows() == 0) return false;
    RowMatrixXd a1 = g.rows * model.encoder.w1;
    a1.rowwise() += model.encoder.b1.row(0);
    const double reach = h * std::max(1.0, g.rows.cwiseAbs().maxCoeff());
    return a1.cwiseAbs().minCoeff() <= 2.0 * reach;
  };
  for (const auto& f : b.frames)
    if (check(f.points)) return true;
  return check(b.dense_points);
}

}  // namespace

GradCheckReport check_model_gradients(const GradCheckConfig& config) {
  check_config(config);
  GradCheckReport report;
  constexpr int kInputWidth = 4;
  constexpr int kChannels = 5;
  for (std::size_t inst = 0; inst < config.instances; ++inst) {
    const double tau = config.taus[inst % config.taus.size()];
    for (std::uint64_t attempt = 0;; ++attempt) {
      Rng rng(derive_seed(derive_seed(config.seed, inst), attempt));
      const std::size_t m = 2 + rng.below(config.max_regions - 1);
      ModelConfig mc;
      mc.hidden = 8;
      mc.feature_dim = 6;
      mc.embed_dim = static_cast<int>(2 + rng.below(config.max_dim - 1));
      Model model = init_model(kInputWidth, kChannels, mc, rng.next_u64());
      const PreparedBatch batch = random_prepared_batch(rng.next_u64(), m, kInputWidth, kChannels);
      if (kink_in_reach(model, batch, config.step)) {
        ++report.resampled;
        continue;
      }
      LossWeights weights{rng.uniform(0.5, 1.5), rng.uniform(0.5, 1.5), rng.uniform(0.5, 1.5),
                          rng.uniform(0.5, 1.5)};
      const Evaluation eval = evaluate(model, batch, tau, weights, true);
      std::vector<const RowMatrixXd*> analytic;
      for (const auto& [name, p] : eval.grad.parameters()) analytic.push_back(p);
      std::vector<RowMatrixXd*> params;
      for (auto& [name, p] : model.parameters()) params.push_back(p);
      const Eigen::VectorXd num = numeric_gradient(
          params, [&] { return evaluate(model, batch, tau, weights, false).loss.total; },
          config.step);
      record(report, {"model.total", inst, m, static_cast<std::size_t>(mc.embed_dim), tau,
                      relative_error(flatten(analytic), num)});
      break;
    }
  }
  return report;
}

}  // namespace fpt
