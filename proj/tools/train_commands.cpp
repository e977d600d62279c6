#include <spdlog/spdlog.h>

#include <chrono>
#include <fstream>
#include <map>

#include "commands.hpp"
#include "fpt/container.hpp"
#include "fpt/error.hpp"
#include "fpt/gradcheck.hpp"
#include "fpt/pipeline.hpp"

namespace fpt::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void add_pretrain(CLI::App& root, CommandList& list) {
  struct Args {
    std::string scene;
    std::uint64_t scene_seed = 0;
    std::uint64_t steps = 200;
    std::uint64_t seed = 0;
    double lr = TrainConfig{}.lr;
    double tau = kDefaultTemperature;
    double w_sc = 1.0, w_tc = 1.0, w_cc = 1.0, w_d2s = 1.0;
    double timespan = kDefaultTimespan;
    std::uint64_t sweeps = kDefaultSweeps;
    std::int64_t keyframe = -1;
    int hidden = ModelConfig{}.hidden;
    int feature_dim = ModelConfig{}.feature_dim;
    int embed_dim = ModelConfig{}.embed_dim;
    std::string out;
  };
  auto a = std::make_shared<Args>();
  Command& c = new_command(root, list, "pretrain",
                           "Train encoder and heads with the composite objective");
  Params& p = *c.params;
  p.add("scene", a->scene, "Scene directory (default: bundled scene generated in-process)");
  p.add("scene-seed", a->scene_seed, "Seed of the bundled scene");
  p.add("steps", a->steps, "Gradient-descent steps");
  p.add("seed", a->seed, "Parameter initialisation seed");
  p.add("lr", a->lr, "Learning rate");
  p.add("tau", a->tau, "Contrastive temperature");
  p.add("w-sc", a->w_sc, "Spatial contrastive weight");
  p.add("w-tc", a->w_tc, "Temporal contrastive weight");
  p.add("w-cc", a->w_cc, "Cross-sensor temporal weight");
  p.add("w-d2s", a->w_d2s, "Dense-to-sparse weight");
  p.add("timespan", a->timespan, "Seconds between the keyframe and its neighbours");
  p.add("sweeps", a->sweeps, "Sweeps merged into the dense cloud");
  p.add("keyframe", a->keyframe, "Keyframe index (-1: middle frame)");
  p.add("hidden", a->hidden, "Encoder hidden width");
  p.add("feature-dim", a->feature_dim, "Encoder output width D");
  p.add("embed-dim", a->embed_dim, "Shared embedding width C");
  p.add("out", a->out, "Directory for loss.csv and the checkpoint");
  const Params* params = c.params.get();
  c.run = [a, params] {
    const auto t0 = std::chrono::steady_clock::now();
    const SyntheticScene scene = a->scene.empty() ? generate_scene(a->scene_seed) : read_scene(a->scene);
    const std::size_t offset = frame_offset(a->timespan, scene.timestep());
    const std::size_t key = a->keyframe < 0 ? scene.frames.size() / 2
                                            : static_cast<std::size_t>(a->keyframe);
    const PreparedBatch batch = prepare_batch(make_train_batch(scene, key, offset, a->sweeps));

    TrainConfig cfg;
    cfg.lr = a->lr;
    cfg.tau = a->tau;
    cfg.weights = {a->w_sc, a->w_tc, a->w_cc, a->w_d2s};
    cfg.seed = a->seed;
    cfg.model = {a->hidden, a->feature_dim, a->embed_dim};
    const int input_width = 3 + static_cast<int>(scene.frames[key].cloud.attr_width());
    TrainState state =
        init_train_state(cfg, input_width, static_cast<int>(scene.config.feature_channels));
    const AlignmentStats before = alignment_stats(state.model, batch);

    std::string csv = "step,total,spatial,temporal,cross,d2s,missing\n";
    auto log_row = [&](std::uint64_t step, const LossBreakdown& l) {
      std::string missing;
      for (const auto& m : l.missing) missing += (missing.empty() ? "" : ";") + m;
      csv += std::to_string(step) + "," + format_double(l.total) + "," + format_double(l.spatial) +
             "," + format_double(l.temporal) + "," + format_double(l.cross) + "," +
             format_double(l.d2s) + "," + missing + "\n";
    };
    double initial = 0.0;
    std::vector<std::string> missing;
    for (std::uint64_t s = 0; s < a->steps; ++s) {
      auto [next, loss] = train_step(state, batch);
      if (s == 0) {
        initial = loss.total;
        missing = loss.missing;
      }
      log_row(s, loss);
      if (s % 20 == 0) spdlog::info("step {} total {:.6f}", s, loss.total);
      state = std::move(next);
    }
    const LossBreakdown final_loss = evaluate(state.model, batch, state.tau, state.weights, false).loss;
    if (a->steps == 0) {
      initial = final_loss.total;
      missing = final_loss.missing;
    }
    log_row(a->steps, final_loss);
    const AlignmentStats after = alignment_stats(state.model, batch);

    json result = {
        {"keyframe", key},
        {"regions", {batch.frames[0].index.region_count(), batch.frames[1].index.region_count(),
                     batch.frames[2].index.region_count()}},
        {"steps", a->steps},
        {"initial_loss", initial},
        {"final_loss", final_loss.total},
        {"loss_ratio", initial != 0.0 ? final_loss.total / initial : 1.0},
        {"final_breakdown",
         {{"spatial", final_loss.spatial},
          {"temporal", final_loss.temporal},
          {"cross", final_loss.cross},
          {"d2s", final_loss.d2s}}},
        {"missing_terms", missing},
        {"matched_cosine_initial", before.matched},
        {"mismatched_cosine_initial", before.mismatched},
        {"matched_cosine", after.matched},
        {"mismatched_cosine", after.mismatched},
        {"cosine_gap", after.matched - after.mismatched},
    };
    if (!a->out.empty()) {
      const fs::path dir(a->out);
      fs::create_directories(dir);
      const std::string resolved = params->resolved().dump();
      const std::string hash = hex64(fnv1a64(std::as_bytes(std::span(resolved))));
      std::ofstream(dir / "loss.csv", std::ios::binary) << csv;
      save_checkpoint(dir / "checkpoint", state, hash);
      result["config_hash"] = hash;
      result["outputs"] = {file_entry(dir / "loss.csv", dir),
                           file_entry(dir / "checkpoint" / "checkpoint.fpt", dir),
                           file_entry(dir / "checkpoint" / "checkpoint.json", dir)};
    }
    spdlog::info("pretrain finished in {:.2f} s",
                 std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    return result;
  };
}

void add_loss_check(CLI::App& root, CommandList& list) {
  struct Args {
    std::uint64_t instances = 100;
    std::uint64_t model_instances = 20;
    std::uint64_t seed = 0;
    std::uint64_t max_regions = 8;
    std::uint64_t max_dim = 16;
    std::vector<double> taus{1.0, 0.1, 0.07};
    double step = 1e-5;
    double tolerance = 1e-5;
  };
  auto a = std::make_shared<Args>();
  Command& c = new_command(root, list, "loss-check",
                           "Compare analytic gradients with central finite differences");
  Params& p = *c.params;
  p.add("instances", a->instances, "Random loss instances");
  p.add("model-instances", a->model_instances, "Random full-model instances");
  p.add("seed", a->seed, "Seed");
  p.add("max-regions", a->max_regions, "Largest M");
  p.add("max-dim", a->max_dim, "Largest C");
  p.add("taus", a->taus, "Temperatures, cycled over instances");
  p.add("step", a->step, "Finite-difference step");
  p.add("tolerance", a->tolerance, "Largest accepted relative error");
  c.run = [a] {
    GradCheckConfig cfg;
    cfg.instances = a->instances;
    cfg.seed = a->seed;
    cfg.max_regions = a->max_regions;
    cfg.max_dim = a->max_dim;
    cfg.taus = a->taus;
    cfg.step = a->step;
    const GradCheckReport losses = check_loss_gradients(cfg);
    cfg.instances = a->model_instances;
    const GradCheckReport model = check_model_gradients(cfg);

    std::map<std::string, std::pair<std::size_t, double>> terms;
    for (const auto* r : {&losses, &model})
      for (const auto& rec : r->records) {
        auto& t = terms[rec.term];
        ++t.first;
        t.second = std::max(t.second, rec.rel_error);
      }
    json per_term = json::object();
    for (const auto& [name, t] : terms)
      per_term[name] = {{"instances", t.first}, {"max_rel_error", t.second}};
    const double worst = std::max(losses.max_rel_error, model.max_rel_error);
    return json{{"terms", per_term},
                {"max_rel_error", worst},
                {"model_resampled", model.resampled},
                {"tolerance", a->tolerance},
                {"passed", worst < a->tolerance}};
  };
}

}  // namespace

void add_train_commands(CLI::App& root, CommandList& list) {
  add_pretrain(root, list);
  add_loss_check(root, list);
}

}  // namespace fpt::cli
