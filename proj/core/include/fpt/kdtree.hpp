#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "fpt/geometry.hpp"

namespace fpt {

struct Neighbor {
  std::size_t index = 0;
  double distance_squared = 0.0;  // (dx*dx + dy*dy) + dz*dz
};

/// Exact nearest-neighbour KD-tree over 3-D points. Build once, query from
/// any number of threads. Among equidistant points the smallest index wins.
class NeighborIndex {
 public:
  explicit NeighborIndex(const CoordMatrix& points, std::size_t leaf_size = 8);

  std::size_t size() const { return static_cast<std::size_t>(points_.rows()); }
  std::optional<Neighbor> nearest(const Vec3& query) const;

 private:
  struct Node {
    std::size_t begin = 0, end = 0;  // range in order_
    int axis = -1;                   // -1 for leaves
    double split = 0.0;
    std::size_t left = 0, right = 0;
  };

  std::size_t build(std::size_t begin, std::size_t end);
  void search(std::size_t node, const Vec3& q, Neighbor& best, bool& found) const;

  CoordMatrix points_;
  std::vector<std::size_t> order_;
  std::vector<Node> nodes_;
  std::size_t leaf_size_;
};

/// Squared distance in the fixed evaluation order shared with the tree.
inline double squared_distance(const Vec3& a, const Vec3& b) {
  const double dx = a.x() - b.x();
  const double dy = a.y() - b.y();
  const double dz = a.z() - b.z();
  return (dx * dx + dy * dy) + dz * dz;
}

}  // namespace fpt
