#pragma once

#include <cstdint>
#include <vector>

#include "fpt/geometry.hpp"
#include "fpt/scene_types.hpp"

namespace fpt {

inline constexpr double kDefaultVoteSigma = 0.25;  // metres

struct VoteConfig {
  double sigma = kDefaultVoteSigma;  // neighbours count only when d < sigma
};

/// One frame's cloud, its scores and the transform into the shared frame.
struct VoteFrame {
  const PointCloud& cloud;
  const SemanticScores& scores;
  const RigidTransform& to_unified;
};

struct VoteResult {
  SemanticScores scores;
  std::vector<std::uint32_t> labels;  // argmax, lowest class on ties
  std::vector<std::uint8_t> counts;   // contributing rows per point, 1..3
};

/// Averages each current point's score row with the rows of its nearest
/// neighbours in the previous and next frames when they lie closer than
/// sigma. The output is flagged as probabilities only if all inputs are.
VoteResult temporal_vote(const VoteFrame& prev, const VoteFrame& curr, const VoteFrame& next,
                         const VoteConfig& config = {});

}  // namespace fpt
