#include "fpt/temporal_vote.hpp"

#include <cmath>
#include <optional>
#include <string>

#include "fpt/error.hpp"
#include "fpt/kdtree.hpp"

namespace fpt {

namespace {

void check_frame(const VoteFrame& f, const char* name, std::size_t classes) {
  if (f.scores.rows() != f.cloud.size())
    throw InvalidArgument(std::string(name) + " frame: " + std::to_string(f.scores.rows()) +
                          " score rows for " + std::to_string(f.cloud.size()) + " points");
  if (f.scores.classes() != classes)
    throw InvalidArgument(std::string(name) + " frame: " + std::to_string(f.scores.classes()) +
                          " classes, expected " + std::to_string(classes));
}

}  // namespace

VoteResult temporal_vote(const VoteFrame& prev, const VoteFrame& curr, const VoteFrame& next,
                         const VoteConfig& config) {
  if (!(config.sigma >= 0.0)) throw InvalidArgument("sigma must be non-negative");
  const std::size_t classes = curr.scores.classes();
  check_frame(prev, "previous", classes);
  check_frame(curr, "current", classes);
  check_frame(next, "next", classes);

  const CoordMatrix pc = transform_cloud(prev.cloud, prev.to_unified).coords();
  const CoordMatrix cc = transform_cloud(curr.cloud, curr.to_unified).coords();
  const CoordMatrix nc = transform_cloud(next.cloud, next.to_unified).coords();
  const NeighborIndex prev_index(pc);
  const NeighborIndex next_index(nc);

  const std::size_t n = curr.cloud.size();
  ScoreMatrix out = curr.scores.data();
  std::vector<std::uint8_t> counts(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 q = cc.row(static_cast<Eigen::Index>(i)).transpose();
    auto row = out.row(static_cast<Eigen::Index>(i));
    auto accumulate = [&](const NeighborIndex& index, const SemanticScores& scores) {
      const std::optional<Neighbor> nb = index.nearest(q);
      if (nb && std::sqrt(nb->distance_squared) < config.sigma) {
        row += scores.data().row(static_cast<Eigen::Index>(nb->index));
        ++counts[i];
      }
    };
    accumulate(prev_index, prev.scores);
    accumulate(next_index, next.scores);
    if (counts[i] > 1) row /= static_cast<double>(counts[i]);
  }

  const bool simplex =
      prev.scores.probabilities() && curr.scores.probabilities() && next.scores.probabilities();
  VoteResult result{SemanticScores(std::move(out), simplex), {}, std::move(counts)};
  result.labels = argmax_labels(result.scores);
  return result;
}

}  // namespace fpt
