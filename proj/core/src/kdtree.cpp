#include "fpt/kdtree.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace fpt {

NeighborIndex::NeighborIndex(const CoordMatrix& points, std::size_t leaf_size)
    : points_(points), order_(static_cast<std::size_t>(points.rows())),
      leaf_size_(std::max<std::size_t>(leaf_size, 1)) {
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  if (!order_.empty()) build(0, order_.size());
}

std::size_t NeighborIndex::build(std::size_t begin, std::size_t end) {
  const std::size_t id = nodes_.size();
  nodes_.push_back({begin, end});
  if (end - begin <= leaf_size_) return id;

  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (std::size_t k = begin; k < end; ++k) {
    const auto p = points_.row(static_cast<Eigen::Index>(order_[k]));
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::min(lo[a], p(a));
      hi[a] = std::max(hi[a], p(a));
    }
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  if (!(hi[axis] > lo[axis])) return id;  // all points coincide

  const std::size_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(begin),
                   order_.begin() + static_cast<std::ptrdiff_t>(mid),
                   order_.begin() + static_cast<std::ptrdiff_t>(end),
                   [&](std::size_t a, std::size_t b) {
                     const double ca = points_(static_cast<Eigen::Index>(a), axis);
                     const double cb = points_(static_cast<Eigen::Index>(b), axis);
                     return ca < cb || (ca == cb && a < b);
                   });
  const double split = points_(static_cast<Eigen::Index>(order_[mid]), axis);
  const std::size_t left = build(begin, mid);
  const std::size_t right = build(mid, end);
  Node& node = nodes_[id];
  node.axis = axis;
  node.split = split;
  node.left = left;
  node.right = right;
  return id;
}

void NeighborIndex::search(std::size_t id, const Vec3& q, Neighbor& best, bool& found) const {
  const Node& node = nodes_[id];
  if (node.axis < 0) {
    for (std::size_t k = node.begin; k < node.end; ++k) {
      const std::size_t i = order_[k];
      const double d2 = squared_distance(q, points_.row(static_cast<Eigen::Index>(i)).transpose());
      if (!found || d2 < best.distance_squared || (d2 == best.distance_squared && i < best.index)) {
        best = {i, d2};
        found = true;
      }
    }
    return;
  }
  const double diff = q[node.axis] - node.split;
  const std::size_t near = diff < 0.0 ? node.left : node.right;
  const std::size_t far = diff < 0.0 ? node.right : node.left;
  search(near, q, best, found);
  // Far-side points are at least |diff| away along the split axis; equality
  // still has to be visited for the index tie-break.
  if (!found || diff * diff <= best.distance_squared) search(far, q, best, found);
}

std::optional<Neighbor> NeighborIndex::nearest(const Vec3& query) const {
  if (nodes_.empty()) return std::nullopt;
  Neighbor best;
  bool found = false;
  search(0, query, best, found);
  return best;
}

}  // namespace fpt
