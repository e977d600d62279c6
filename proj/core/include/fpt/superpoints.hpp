#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "fpt/geometry.hpp"
#include "fpt/scene_types.hpp"

namespace fpt {

/// Identifies the superpixel a superpoint was built from.
struct RegionMeta {
  std::uint32_t camera = 0;
  std::uint32_t superpixel = 0;
  std::uint32_t area = 0;  // labeled pixels carrying `superpixel` in that camera

  friend bool operator==(const RegionMeta&, const RegionMeta&) = default;
};

/// Partition of (a subset of) a cloud's points into M nonempty regions.
class SuperpointIndex {
 public:
  static constexpr std::uint32_t kNone = 0xFFFFFFFFu;

  SuperpointIndex() = default;
  /// `group_of[i]` is the region of point i or kNone. Every region in `meta`
  /// must receive at least one point.
  SuperpointIndex(std::vector<std::uint32_t> group_of, std::vector<RegionMeta> meta);

  std::size_t point_count() const { return group_of_.size(); }
  std::size_t region_count() const { return meta_.size(); }

  std::optional<std::uint32_t> region_of(std::size_t point) const {
    const std::uint32_t g = group_of_[point];
    return g == kNone ? std::nullopt : std::optional<std::uint32_t>(g);
  }
  const std::vector<std::uint32_t>& group_of() const { return group_of_; }
  /// Member point indices of region m, ascending.
  const std::vector<std::size_t>& members(std::size_t m) const { return members_[m]; }
  const RegionMeta& meta(std::size_t m) const { return meta_[m]; }
  const std::vector<RegionMeta>& metas() const { return meta_; }

  friend bool operator==(const SuperpointIndex& a, const SuperpointIndex& b) {
    return a.group_of_ == b.group_of_ && a.meta_ == b.meta_;
  }

 private:
  std::vector<std::uint32_t> group_of_;
  std::vector<RegionMeta> meta_;
  std::vector<std::vector<std::size_t>> members_;
};

/// Groups points by the superpixel they project onto. A point seen by several
/// cameras goes to the lowest-index camera where it lands on a labeled pixel.
/// Regions are ordered by (camera, superpixel id).
SuperpointIndex build_superpoints(const PointCloud& cloud,
                                  const std::vector<CalibratedCamera>& cameras,
                                  const std::vector<LabelMap>& maps);

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Mean feature row per region (M x C), regions in index order.
RowMatrix pool_by_group(const RowMatrix& features, const SuperpointIndex& index);

struct PooledLabels {
  std::vector<std::uint32_t> ids;  // ascending, unlabeled pixels excluded
  RowMatrix rows;                  // one mean row per id
};

/// Mean of per-pixel features (H*W x C, row-major pixel order) for every
/// label present in `map`.
PooledLabels pool_by_label(const RowMatrix& pixel_features, const LabelMap& map);

/// Pairs regions of two indices that share (superpixel id, camera). Output is
/// sorted by superpixel id, then camera.
std::vector<std::pair<std::uint32_t, std::uint32_t>> match_regions(const SuperpointIndex& a,
                                                                   const SuperpointIndex& b);

/// Result of cross-view class unification.
struct ViewAlignment {
  std::vector<LabelMap> maps;
  std::size_t conflict_sets = 0;     // linked instance groups that disagreed
  std::size_t relabeled_regions = 0; // instances whose class changed
};

/// Unifies class labels of instances that overlap in several cameras.
///
/// Instances are 4-connected components of equal class within one map.
/// Instances linked through points visible in more than one camera form a
/// group; when a group holds more than one class, every instance in it takes
/// the class of the largest-area instance (ties: lower camera, then lower
/// component in raster order). Groups are computed from the input maps and
/// applied in one pass; instances outside any group are left unchanged.
ViewAlignment align_views(const std::vector<LabelMap>& maps, const PointCloud& cloud,
                          const std::vector<CalibratedCamera>& cameras);

/// Number of points that land on labeled pixels in >= 2 cameras with
/// differing labels.
std::size_t count_view_conflicts(const std::vector<LabelMap>& maps, const PointCloud& cloud,
                                 const std::vector<CalibratedCamera>& cameras);

/// 4-connected components of equal label. Unlabeled pixels get kUnlabeled.
struct Components {
  std::vector<std::uint32_t> component_of;  // per pixel
  std::vector<std::uint32_t> label;         // per component
  std::vector<std::uint32_t> area;          // per component
};
Components connected_components(const LabelMap& map);

}  // namespace fpt
