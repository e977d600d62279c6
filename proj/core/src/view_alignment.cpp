#include <algorithm>
#include <numeric>
#include <string>

#include "fpt/error.hpp"
#include "fpt/superpoints.hpp"

namespace fpt {

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::size_t> parent_;
};

struct Hit {
  std::uint32_t camera;
  std::uint32_t label;
  std::size_t pixel;
};

// Labeled-pixel hits of every point, cameras in ascending order.
std::vector<std::vector<Hit>> collect_hits(const std::vector<LabelMap>& maps,
                                           const PointCloud& cloud,
                                           const std::vector<CalibratedCamera>& cameras) {
  if (cameras.size() != maps.size())
    throw InvalidArgument("got " + std::to_string(maps.size()) + " label maps for " +
                          std::to_string(cameras.size()) + " cameras");
  std::vector<std::vector<Hit>> hits(cloud.size());
  for (std::uint32_t j = 0; j < cameras.size(); ++j) {
    const auto& intr = cameras[j].intrinsics;
    if (maps[j].width() != intr.width() || maps[j].height() != intr.height())
      throw InvalidArgument("label map " + std::to_string(j) +
                            " does not match its camera's image size");
    for (const auto& proj : project_points(cloud, intr, cameras[j].extrinsic, j)) {
      const auto [x, y] = pixel_of(proj);
      const std::uint32_t label = maps[j].at(x, y);
      if (label == kUnlabeled) continue;
      hits[proj.point_index].push_back(
          {j, label, static_cast<std::size_t>(y) * maps[j].width() + x});
    }
  }
  return hits;
}

}  // namespace

Components connected_components(const LabelMap& map) {
  Components out;
  const std::uint32_t w = map.width();
  const std::uint32_t h = map.height();
  const auto& labels = map.labels();
  out.component_of.assign(labels.size(), kUnlabeled);
  std::vector<std::size_t> stack;
  for (std::size_t start = 0; start < labels.size(); ++start) {
    if (labels[start] == kUnlabeled || out.component_of[start] != kUnlabeled) continue;
    const auto id = static_cast<std::uint32_t>(out.label.size());
    const std::uint32_t label = labels[start];
    std::uint32_t area = 0;
    out.component_of[start] = id;
    stack.push_back(start);
    while (!stack.empty()) {
      const std::size_t p = stack.back();
      stack.pop_back();
      ++area;
      const auto x = static_cast<std::uint32_t>(p % w);
      const auto y = static_cast<std::uint32_t>(p / w);
      auto visit = [&](std::size_t q) {
        if (labels[q] == label && out.component_of[q] == kUnlabeled) {
          out.component_of[q] = id;
          stack.push_back(q);
        }
      };
      if (x > 0) visit(p - 1);
      if (x + 1 < w) visit(p + 1);
      if (y > 0) visit(p - w);
      if (y + 1 < h) visit(p + w);
    }
    out.label.push_back(label);
    out.area.push_back(area);
  }
  return out;
}

ViewAlignment align_views(const std::vector<LabelMap>& maps, const PointCloud& cloud,
                          const std::vector<CalibratedCamera>& cameras) {
  const auto hits = collect_hits(maps, cloud, cameras);

  // Global instance numbering: camera-major, raster order within a camera.
  std::vector<Components> comps;
  std::vector<std::size_t> offset{0};
  comps.reserve(maps.size());
  for (const auto& map : maps) {
    comps.push_back(connected_components(map));
    offset.push_back(offset.back() + comps.back().label.size());
  }
  const std::size_t total = offset.back();
  auto instance_of = [&](const Hit& hit) {
    return offset[hit.camera] + comps[hit.camera].component_of[hit.pixel];
  };
  auto label_of = [&](std::size_t inst) {
    const auto cam = static_cast<std::size_t>(
        std::upper_bound(offset.begin(), offset.end(), inst) - offset.begin() - 1);
    return std::pair{cam, inst - offset[cam]};
  };

  DisjointSets sets(total);
  std::vector<bool> linked(total, false);
  for (const auto& point_hits : hits) {
    if (point_hits.size() < 2) continue;
    const std::size_t first = instance_of(point_hits.front());
    linked[first] = true;
    for (std::size_t k = 1; k < point_hits.size(); ++k) {
      const std::size_t inst = instance_of(point_hits[k]);
      linked[inst] = true;
      sets.unite(first, inst);
    }
  }

  // Per group: winner instance (largest area, then lowest global number) and
  // whether its members disagree on class.
  constexpr std::size_t kNoWinner = ~std::size_t{0};
  std::vector<std::size_t> winner(total, kNoWinner);
  std::vector<bool> mixed(total, false);
  std::vector<std::uint32_t> first_class(total, kUnlabeled);
  for (std::size_t inst = 0; inst < total; ++inst) {
    if (!linked[inst]) continue;
    const std::size_t root = sets.find(inst);
    const auto [cam, local] = label_of(inst);
    const std::uint32_t cls = comps[cam].label[local];
    if (first_class[root] == kUnlabeled)
      first_class[root] = cls;
    else if (first_class[root] != cls)
      mixed[root] = true;
    if (winner[root] == kNoWinner) {
      winner[root] = inst;
    } else {
      const auto [wcam, wlocal] = label_of(winner[root]);
      if (comps[cam].area[local] > comps[wcam].area[wlocal]) winner[root] = inst;
    }
  }

  ViewAlignment out;
  out.maps = maps;
  for (std::size_t inst = 0; inst < total; ++inst) {
    if (!linked[inst]) continue;
    const std::size_t root = sets.find(inst);
    if (!mixed[root]) continue;
    if (root == inst) ++out.conflict_sets;
    const auto [wcam, wlocal] = label_of(winner[root]);
    const std::uint32_t target = comps[wcam].label[wlocal];
    const auto [cam, local] = label_of(inst);
    if (comps[cam].label[local] == target) continue;
    ++out.relabeled_regions;
    auto& labels = out.maps[cam].labels();
    const auto& component_of = comps[cam].component_of;
    for (std::size_t p = 0; p < labels.size(); ++p)
      if (component_of[p] == local) labels[p] = target;
  }
  return out;
}

std::size_t count_view_conflicts(const std::vector<LabelMap>& maps, const PointCloud& cloud,
                                 const std::vector<CalibratedCamera>& cameras) {
  std::size_t conflicts = 0;
  for (const auto& point_hits : collect_hits(maps, cloud, cameras)) {
    for (std::size_t k = 1; k < point_hits.size(); ++k) {
      if (point_hits[k].label != point_hits.front().label) {
        ++conflicts;
        break;
      }
    }
  }
  return conflicts;
}

}  // namespace fpt
