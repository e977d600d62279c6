#include "fpt/superpoints.hpp"

#include <algorithm>
#include <map>
#include <string>
#include <tuple>

#include "fpt/error.hpp"

namespace fpt {

SuperpointIndex::SuperpointIndex(std::vector<std::uint32_t> group_of, std::vector<RegionMeta> meta)
    : group_of_(std::move(group_of)), meta_(std::move(meta)), members_(meta_.size()) {
  for (std::size_t i = 0; i < group_of_.size(); ++i) {
    const std::uint32_t g = group_of_[i];
    if (g == kNone) continue;
    if (g >= meta_.size())
      throw InvalidArgument("point " + std::to_string(i) + " refers to region " +
                            std::to_string(g) + " of " + std::to_string(meta_.size()));
    members_[g].push_back(i);
  }
  for (std::size_t m = 0; m < members_.size(); ++m)
    if (members_[m].empty())
      throw InvalidArgument("region " + std::to_string(m) + " has no member points");
}

namespace {

void check_cameras(const std::vector<CalibratedCamera>& cameras, const std::vector<LabelMap>& maps) {
  if (cameras.size() != maps.size())
    throw InvalidArgument("got " + std::to_string(maps.size()) + " label maps for " +
                          std::to_string(cameras.size()) + " cameras");
  for (std::size_t j = 0; j < cameras.size(); ++j) {
    const auto& intr = cameras[j].intrinsics;
    if (maps[j].width() != intr.width() || maps[j].height() != intr.height())
      throw InvalidArgument("label map " + std::to_string(j) + " is " +
                            std::to_string(maps[j].width()) + "x" +
                            std::to_string(maps[j].height()) + " but camera is " +
                            std::to_string(intr.width()) + "x" + std::to_string(intr.height()));
  }
}

}  // namespace

SuperpointIndex build_superpoints(const PointCloud& cloud,
                                  const std::vector<CalibratedCamera>& cameras,
                                  const std::vector<LabelMap>& maps) {
  check_cameras(cameras, maps);

  // (camera, superpixel) of the first camera hitting a labeled pixel.
  constexpr std::uint64_t kUnassigned = ~std::uint64_t{0};
  std::vector<std::uint64_t> key_of(cloud.size(), kUnassigned);
  for (std::uint32_t j = 0; j < cameras.size(); ++j) {
    for (const auto& proj :
         project_points(cloud, cameras[j].intrinsics, cameras[j].extrinsic, j)) {
      if (key_of[proj.point_index] != kUnassigned) continue;
      const auto [x, y] = pixel_of(proj);
      const std::uint32_t label = maps[j].at(x, y);
      if (label == kUnlabeled) continue;
      key_of[proj.point_index] = (std::uint64_t{j} << 32) | label;
    }
  }

  std::map<std::uint64_t, std::uint32_t> region_of_key;
  for (auto key : key_of)
    if (key != kUnassigned) region_of_key.emplace(key, 0);

  std::vector<RegionMeta> meta;
  meta.reserve(region_of_key.size());
  for (auto& [key, region] : region_of_key) {
    region = static_cast<std::uint32_t>(meta.size());
    const auto camera = static_cast<std::uint32_t>(key >> 32);
    const auto superpixel = static_cast<std::uint32_t>(key & 0xFFFFFFFFu);
    const auto& labels = maps[camera].labels();
    const auto area = std::count(labels.begin(), labels.end(), superpixel);
    meta.push_back({camera, superpixel, static_cast<std::uint32_t>(area)});
  }

  std::vector<std::uint32_t> group_of(cloud.size(), SuperpointIndex::kNone);
  for (std::size_t i = 0; i < key_of.size(); ++i)
    if (key_of[i] != kUnassigned) group_of[i] = region_of_key.at(key_of[i]);
  return SuperpointIndex(std::move(group_of), std::move(meta));
}

RowMatrix pool_by_group(const RowMatrix& features, const SuperpointIndex& index) {
  if (static_cast<std::size_t>(features.rows()) != index.point_count())
    throw InvalidArgument("feature rows (" + std::to_string(features.rows()) +
                          ") differ from indexed point count (" +
                          std::to_string(index.point_count()) + ")");
  RowMatrix out = RowMatrix::Zero(static_cast<Eigen::Index>(index.region_count()), features.cols());
  for (std::size_t m = 0; m < index.region_count(); ++m) {
    const auto& members = index.members(m);
    auto row = out.row(static_cast<Eigen::Index>(m));
    for (std::size_t i : members) row += features.row(static_cast<Eigen::Index>(i));
    row /= static_cast<double>(members.size());
  }
  return out;
}

PooledLabels pool_by_label(const RowMatrix& pixel_features, const LabelMap& map) {
  if (static_cast<std::size_t>(pixel_features.rows()) != map.pixel_count())
    throw InvalidArgument("pixel feature rows (" + std::to_string(pixel_features.rows()) +
                          ") differ from label map pixel count (" +
                          std::to_string(map.pixel_count()) + ")");
  std::map<std::uint32_t, std::pair<Eigen::RowVectorXd, std::size_t>> acc;
  const auto& labels = map.labels();
  for (std::size_t p = 0; p < labels.size(); ++p) {
    if (labels[p] == kUnlabeled) continue;
    auto [it, inserted] = acc.try_emplace(
        labels[p], Eigen::RowVectorXd::Zero(pixel_features.cols()), std::size_t{0});
    it->second.first += pixel_features.row(static_cast<Eigen::Index>(p));
    ++it->second.second;
  }
  PooledLabels out;
  out.rows.resize(static_cast<Eigen::Index>(acc.size()), pixel_features.cols());
  Eigen::Index r = 0;
  for (const auto& [id, sum_count] : acc) {
    out.ids.push_back(id);
    out.rows.row(r++) = sum_count.first / static_cast<double>(sum_count.second);
  }
  return out;
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> match_regions(const SuperpointIndex& a,
                                                                   const SuperpointIndex& b) {
  using Key = std::pair<std::uint32_t, std::uint32_t>;  // (superpixel, camera)
  std::map<Key, std::uint32_t> in_b;
  for (std::uint32_t m = 0; m < b.region_count(); ++m)
    in_b.emplace(Key{b.meta(m).superpixel, b.meta(m).camera}, m);

  std::vector<std::pair<Key, std::pair<std::uint32_t, std::uint32_t>>> matched;
  for (std::uint32_t m = 0; m < a.region_count(); ++m) {
    const Key key{a.meta(m).superpixel, a.meta(m).camera};
    if (auto it = in_b.find(key); it != in_b.end()) matched.push_back({key, {m, it->second}});
  }
  std::sort(matched.begin(), matched.end());
  std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
  out.reserve(matched.size());
  for (const auto& [key, pair] : matched) out.push_back(pair);
  return out;
}

}  // namespace fpt
