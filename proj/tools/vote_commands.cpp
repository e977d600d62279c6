#include "commands.hpp"
#include "fpt/calibration.hpp"
#include "fpt/container.hpp"
#include "fpt/error.hpp"
#include "fpt/metrics.hpp"
#include "fpt/temporal_vote.hpp"

namespace fpt::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void add_vote(CLI::App& root, CommandList& list) {
  struct Args {
    std::vector<std::string> prev, curr, next;
    std::string poses;
    std::vector<std::uint64_t> pose_rows{0, 1, 2};
    double sigma = kDefaultVoteSigma;
    std::string out;
  };
  auto a = std::make_shared<Args>();
  Command& c = new_command(root, list, "vote", "Temporal voting over three consecutive frames");
  Params& p = *c.params;
  p.add("prev", a->prev, "Previous frame: <cloud.fpt> <scores.fpt>")->expected(2);
  p.add("curr", a->curr, "Current frame: <cloud.fpt> <scores.fpt>")->expected(2);
  p.add("next", a->next, "Next frame: <cloud.fpt> <scores.fpt>")->expected(2);
  p.add("poses", a->poses, "Pose file mapping each frame into a shared frame (default: identity)");
  p.add("pose-rows", a->pose_rows, "Pose rows of prev, curr and next")->expected(3);
  p.add("sigma", a->sigma, "Neighbour distance threshold (m), strict");
  p.add("out", a->out, "Output directory for scores.fpt and labels.fpt");
  c.run = [a] {
    for (const auto* v : {&a->prev, &a->curr, &a->next})
      if (v->size() != 2) throw UsageError("vote: --prev, --curr and --next take <cloud> <scores>");
    if (a->out.empty()) throw UsageError("vote: --out is required");
    if (a->pose_rows.size() != 3) throw UsageError("vote: --pose-rows takes three rows");
    std::array<RigidTransform, 3> poses;
    if (!a->poses.empty()) {
      const auto all = read_poses(a->poses);
      for (std::size_t f = 0; f < 3; ++f) {
        if (a->pose_rows[f] >= all.size())
          throw InvalidArgument("pose row " + std::to_string(a->pose_rows[f]) + " out of range (" +
                                std::to_string(all.size()) + " poses)");
        poses[f] = all[a->pose_rows[f]];
      }
    }
    const std::array<const std::vector<std::string>*, 3> paths{&a->prev, &a->curr, &a->next};
    std::array<PointCloud, 3> clouds;
    std::array<SemanticScores, 3> scores;
    for (std::size_t f = 0; f < 3; ++f) {
      clouds[f] = read_cloud((*paths[f])[0]);
      scores[f] = read_scores((*paths[f])[1]);
    }
    const VoteResult r = temporal_vote({clouds[0], scores[0], poses[0]},
                                       {clouds[1], scores[1], poses[1]},
                                       {clouds[2], scores[2], poses[2]}, VoteConfig{a->sigma});
    const fs::path dir(a->out);
    fs::create_directories(dir);
    write_scores(dir / "scores.fpt", r.scores);
    write_labels(dir / "labels.fpt", r.labels);
    std::array<std::size_t, 3> hist{};
    for (auto n : r.counts) ++hist[n - 1];
    return json{{"points", clouds[1].size()},
                {"contributors", {{"1", hist[0]}, {"2", hist[1]}, {"3", hist[2]}}},
                {"input_scores", file_entry(a->curr[1])},
                {"outputs", {file_entry(dir / "scores.fpt"), file_entry(dir / "labels.fpt")}}};
  };
}

void add_eval(CLI::App& root, CommandList& list) {
  struct Args {
    std::string pred;
    std::string truth;
    std::uint32_t classes = 0;
    std::int64_t ignore = -1;
  };
  auto a = std::make_shared<Args>();
  Command& c = new_command(root, list, "eval", "Per-class IoU and mIoU of predicted labels");
  Params& p = *c.params;
  p.add("pred", a->pred, "FPT1 predicted labels (or scores, reduced by argmax)");
  p.add("truth", a->truth, "FPT1 ground-truth labels");
  p.add("classes", a->classes, "Number of classes");
  p.add("ignore", a->ignore, "Truth label to skip (-1: none)");
  c.run = [a] {
    if (a->pred.empty() || a->truth.empty() || a->classes == 0)
      throw UsageError("eval: --pred, --truth and --classes are required");
    const Bytes pred_bytes = read_bytes(a->pred);
    const std::vector<std::uint32_t> pred =
        peek_header(pred_bytes).kind == ContainerKind::SemanticScores
            ? argmax_labels(decode_scores(pred_bytes))
            : decode_labels(pred_bytes);
    const std::vector<std::uint32_t> truth = read_labels(a->truth);
    std::optional<std::uint32_t> ignore;
    if (a->ignore >= 0) ignore = static_cast<std::uint32_t>(a->ignore);
    const IouReport r = miou(pred, truth, a->classes, ignore);
    json per_class = json::array();
    for (const auto& v : r.per_class) per_class.push_back(v ? json(*v) : json(nullptr));
    return json{{"points", truth.size()},
                {"per_class_iou", per_class},
                {"miou", r.mean ? json(*r.mean) : json(nullptr)}};
  };
}

}  // namespace

void add_vote_commands(CLI::App& root, CommandList& list) {
  add_vote(root, list);
  add_eval(root, list);
}

}  // namespace fpt::cli
