#include "fpt/container.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>

#include "fpt/error.hpp"
#include "fpt/superpoints.hpp"

namespace fpt {

namespace {

constexpr char kMagic[4] = {'F', 'P', 'T', '1'};

template <typename T>
T byteswap_if_needed(T v) {
  if constexpr (std::endian::native == std::endian::little || sizeof(T) == 1) {
    return v;
  } else {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    std::reverse(b, b + sizeof(T));
    std::memcpy(&v, b, sizeof(T));
    return v;
  }
}

class Writer {
 public:
  Writer(ContainerKind kind, ContainerDType dtype, std::array<std::uint64_t, 4> dims,
         std::size_t payload_bytes) {
    out_.reserve(kContainerHeaderSize + payload_bytes);
    raw(kMagic, 4);
    put<std::uint8_t>(static_cast<std::uint8_t>(kind));
    put<std::uint8_t>(static_cast<std::uint8_t>(dtype));
    put<std::uint16_t>(0);
    for (auto d : dims) put<std::uint64_t>(d);
  }

  template <typename T>
  void put(T v) {
    v = byteswap_if_needed(v);
    raw(&v, sizeof(T));
  }

  template <typename T>
  void put_all(const T* data, std::size_t n) {
    if constexpr (std::endian::native == std::endian::little) {
      raw(data, n * sizeof(T));
    } else {
      for (std::size_t i = 0; i < n; ++i) put<T>(data[i]);
    }
  }

  Bytes take() { return std::move(out_); }

 private:
  void raw(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::byte*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  Bytes out_;
};

class Reader {
 public:
  explicit Reader(ByteView bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return byteswap_if_needed(v);
  }

  template <typename T>
  void get_all(T* data, std::size_t n) {
    need(n * sizeof(T));
    std::memcpy(data, bytes_.data() + pos_, n * sizeof(T));
    pos_ += n * sizeof(T);
    if constexpr (std::endian::native != std::endian::little)
      for (std::size_t i = 0; i < n; ++i) data[i] = byteswap_if_needed(data[i]);
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (remaining() < n) throw FormatError("truncated container payload");
  }
  ByteView bytes_;
  std::size_t pos_ = 0;
};

const char* kind_name(ContainerKind k) {
  switch (k) {
    case ContainerKind::PointCloud: return "point cloud";
    case ContainerKind::LabelMap: return "label map";
    case ContainerKind::FeatureMap: return "feature map";
    case ContainerKind::SemanticScores: return "semantic scores";
    case ContainerKind::Labels: return "labels";
    case ContainerKind::Tensor: return "tensor";
    case ContainerKind::SuperpointIndex: return "superpoint index";
  }
  return "unknown";
}

int rank_of(ContainerKind k) {
  switch (k) {
    case ContainerKind::Labels: return 1;
    case ContainerKind::FeatureMap:
    case ContainerKind::SemanticScores: return 3;
    default: return 2;
  }
}

ContainerDType dtype_of(ContainerKind k) {
  switch (k) {
    case ContainerKind::LabelMap:
    case ContainerKind::Labels:
    case ContainerKind::SuperpointIndex: return ContainerDType::U32;
    default: return ContainerDType::F64;
  }
}

std::size_t checked_mul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r = 0;
  if (__builtin_mul_overflow(a, b, &r) || r > SIZE_MAX / 8)
    throw FormatError("container dimensions overflow");
  return static_cast<std::size_t>(r);
}

std::size_t checked_add(std::size_t a, std::size_t b) {
  std::size_t r = 0;
  if (__builtin_add_overflow(a, b, &r)) throw FormatError("container dimensions overflow");
  return r;
}

// Validates the header against the expected kind and checks that exactly
// `elements` values of the kind's dtype follow. Returns a reader positioned
// at the payload.
std::pair<ContainerHeader, Reader> open(ByteView bytes, ContainerKind expected,
                                        auto&& element_count) {
  ContainerHeader h = peek_header(bytes);
  if (h.kind != expected)
    throw FormatError(std::string("expected a ") + kind_name(expected) + " container, found a " +
                      kind_name(h.kind));
  if (h.dtype != dtype_of(expected)) throw FormatError("unexpected dtype tag for this kind");
  for (int d = rank_of(expected); d < 4; ++d)
    if (h.dims[static_cast<std::size_t>(d)] != 0)
      throw FormatError("unused container dimension is nonzero");

  const std::size_t elements = element_count(h.dims);
  const std::size_t width = h.dtype == ContainerDType::F64 ? 8 : 4;
  const std::size_t payload = checked_mul(elements, width);
  const std::size_t available = bytes.size() - kContainerHeaderSize;
  if (available < payload)
    throw FormatError("truncated container payload: expected " + std::to_string(payload) +
                      " bytes, found " + std::to_string(available));
  if (available > payload)
    throw FormatError("container has " + std::to_string(available - payload) + " trailing bytes");
  return {h, Reader(bytes.subspan(kContainerHeaderSize))};
}

std::uint32_t narrow_dim(std::uint64_t d, const char* what) {
  if (d > UINT32_MAX) throw FormatError(std::string(what) + " dimension overflow");
  return static_cast<std::uint32_t>(d);
}

template <typename Fn>
auto with_path(const std::filesystem::path& path, Fn&& fn) {
  try {
    return fn();
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace

ContainerHeader peek_header(ByteView bytes) {
  if (bytes.size() < kContainerHeaderSize) {
    if (bytes.size() >= 4 && std::memcmp(bytes.data(), kMagic, 4) != 0)
      throw FormatError("bad magic: not an FPT1 container");
    throw FormatError("truncated container header");
  }
  if (std::memcmp(bytes.data(), kMagic, 3) != 0)
    throw FormatError("bad magic: not an FPT1 container");
  if (static_cast<char>(bytes[3]) != kMagic[3])
    throw FormatError(std::string("unsupported container version '") +
                      static_cast<char>(bytes[3]) + "'");

  Reader r(bytes.subspan(4));
  ContainerHeader h;
  const auto kind = r.get<std::uint8_t>();
  const auto dtype = r.get<std::uint8_t>();
  const auto reserved = r.get<std::uint16_t>();
  if (kind < 1 || kind > 7) throw FormatError("unknown container kind tag " + std::to_string(kind));
  if (dtype < 1 || dtype > 2) throw FormatError("unknown dtype tag " + std::to_string(dtype));
  if (reserved != 0) throw FormatError("reserved header field is nonzero");
  h.kind = static_cast<ContainerKind>(kind);
  h.dtype = static_cast<ContainerDType>(dtype);
  for (auto& d : h.dims) d = r.get<std::uint64_t>();
  return h;
}

Bytes encode_cloud(const PointCloud& cloud) {
  const std::size_t n = cloud.size();
  const auto width = static_cast<std::size_t>(3 + cloud.attr_width());
  Writer w(ContainerKind::PointCloud, ContainerDType::F64, {n, width, 0, 0}, 8 * (1 + n * width));
  w.put<double>(cloud.timestamp());
  std::vector<double> row(width);
  for (std::size_t i = 0; i < n; ++i) {
    const auto ei = static_cast<Eigen::Index>(i);
    for (int c = 0; c < 3; ++c) row[static_cast<std::size_t>(c)] = cloud.coords()(ei, c);
    for (Eigen::Index c = 0; c < cloud.attr_width(); ++c)
      row[static_cast<std::size_t>(3 + c)] = cloud.attrs()(ei, c);
    w.put_all(row.data(), width);
  }
  return w.take();
}

PointCloud decode_cloud(ByteView bytes) {
  auto [h, r] = open(bytes, ContainerKind::PointCloud, [](const auto& dims) {
    if (dims[1] < 3) throw FormatError("point cloud rows must have at least 3 columns");
    return checked_add(checked_mul(dims[0], dims[1]), 1);
  });
  const auto n = static_cast<Eigen::Index>(h.dims[0]);
  const auto width = static_cast<Eigen::Index>(h.dims[1]);
  const double timestamp = r.get<double>();
  AttrMatrix all(n, width);
  r.get_all(all.data(), static_cast<std::size_t>(n * width));
  try {
    return PointCloud(all.leftCols(3), all.rightCols(width - 3), timestamp);
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("invalid point cloud payload: ") + e.what());
  }
}

Bytes encode_label_map(const LabelMap& map) {
  Writer w(ContainerKind::LabelMap, ContainerDType::U32, {map.height(), map.width(), 0, 0},
           4 * map.pixel_count());
  w.put_all(map.labels().data(), map.pixel_count());
  return w.take();
}

LabelMap decode_label_map(ByteView bytes) {
  auto [h, r] = open(bytes, ContainerKind::LabelMap,
                     [](const auto& dims) { return checked_mul(dims[0], dims[1]); });
  const auto height = narrow_dim(h.dims[0], "label map height");
  const auto width = narrow_dim(h.dims[1], "label map width");
  std::vector<std::uint32_t> labels(static_cast<std::size_t>(h.dims[0] * h.dims[1]));
  r.get_all(labels.data(), labels.size());
  return LabelMap(width, height, std::move(labels));
}

Bytes encode_feature_map(const FeatureMap& map) {
  Writer w(ContainerKind::FeatureMap, ContainerDType::F64,
           {map.height(), map.width(), map.channels(), 0}, 8 * map.data().size());
  w.put_all(map.data().data(), map.data().size());
  return w.take();
}

FeatureMap decode_feature_map(ByteView bytes) {
  auto [h, r] = open(bytes, ContainerKind::FeatureMap, [](const auto& dims) {
    return checked_mul(checked_mul(dims[0], dims[1]), dims[2]);
  });
  const auto height = narrow_dim(h.dims[0], "feature map height");
  const auto width = narrow_dim(h.dims[1], "feature map width");
  const auto channels = narrow_dim(h.dims[2], "feature map channel");
  std::vector<double> data(static_cast<std::size_t>(h.dims[0] * h.dims[1] * h.dims[2]));
  r.get_all(data.data(), data.size());
  try {
    return FeatureMap(width, height, channels, std::move(data));
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("invalid feature map payload: ") + e.what());
  }
}

Bytes encode_scores(const SemanticScores& scores) {
  Writer w(ContainerKind::SemanticScores, ContainerDType::F64,
           {scores.rows(), scores.classes(), scores.probabilities() ? 1u : 0u, 0},
           8 * static_cast<std::size_t>(scores.data().size()));
  w.put_all(scores.data().data(), static_cast<std::size_t>(scores.data().size()));
  return w.take();
}

SemanticScores decode_scores(ByteView bytes) {
  auto [h, r] = open(bytes, ContainerKind::SemanticScores, [](const auto& dims) {
    if (dims[2] > 1) throw FormatError("unknown semantic score flags");
    return checked_mul(dims[0], dims[1]);
  });
  ScoreMatrix data(static_cast<Eigen::Index>(h.dims[0]), static_cast<Eigen::Index>(h.dims[1]));
  r.get_all(data.data(), static_cast<std::size_t>(data.size()));
  try {
    return SemanticScores(std::move(data), h.dims[2] == 1);
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("invalid semantic scores payload: ") + e.what());
  }
}

Bytes encode_labels(std::span<const std::uint32_t> labels) {
  Writer w(ContainerKind::Labels, ContainerDType::U32, {labels.size(), 0, 0, 0}, 4 * labels.size());
  w.put_all(labels.data(), labels.size());
  return w.take();
}

std::vector<std::uint32_t> decode_labels(ByteView bytes) {
  auto [h, r] = open(bytes, ContainerKind::Labels,
                     [](const auto& dims) { return checked_mul(dims[0], 1); });
  std::vector<std::uint32_t> labels(static_cast<std::size_t>(h.dims[0]));
  r.get_all(labels.data(), labels.size());
  return labels;
}

Bytes encode_tensor(const TensorMatrix& tensor) {
  Writer w(ContainerKind::Tensor, ContainerDType::F64,
           {static_cast<std::uint64_t>(tensor.rows()), static_cast<std::uint64_t>(tensor.cols()), 0,
            0},
           8 * static_cast<std::size_t>(tensor.size()));
  w.put_all(tensor.data(), static_cast<std::size_t>(tensor.size()));
  return w.take();
}

TensorMatrix decode_tensor(ByteView bytes) {
  auto [h, r] = open(bytes, ContainerKind::Tensor,
                     [](const auto& dims) { return checked_mul(dims[0], dims[1]); });
  TensorMatrix t(static_cast<Eigen::Index>(h.dims[0]), static_cast<Eigen::Index>(h.dims[1]));
  r.get_all(t.data(), static_cast<std::size_t>(t.size()));
  return t;
}

Bytes encode_superpoints(const SuperpointIndex& index) {
  const std::size_t n = index.point_count();
  const std::size_t m = index.region_count();
  Writer w(ContainerKind::SuperpointIndex, ContainerDType::U32, {n, m, 0, 0}, 4 * (n + 3 * m));
  w.put_all(index.group_of().data(), n);
  for (const auto& meta : index.metas()) {
    w.put<std::uint32_t>(meta.camera);
    w.put<std::uint32_t>(meta.superpixel);
    w.put<std::uint32_t>(meta.area);
  }
  return w.take();
}

SuperpointIndex decode_superpoints(ByteView bytes) {
  auto [h, r] = open(bytes, ContainerKind::SuperpointIndex, [](const auto& dims) {
    return checked_add(static_cast<std::size_t>(checked_mul(dims[0], 1)), checked_mul(dims[1], 3));
  });
  std::vector<std::uint32_t> group_of(static_cast<std::size_t>(h.dims[0]));
  r.get_all(group_of.data(), group_of.size());
  std::vector<RegionMeta> meta(static_cast<std::size_t>(h.dims[1]));
  for (auto& m : meta) {
    m.camera = r.get<std::uint32_t>();
    m.superpixel = r.get<std::uint32_t>();
    m.area = r.get<std::uint32_t>();
  }
  try {
    return SuperpointIndex(std::move(group_of), std::move(meta));
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("invalid superpoint index payload: ") + e.what());
  }
}

Bytes read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw FormatError("cannot open " + path.string());
  const auto size = static_cast<std::size_t>(in.tellg());
  in.seekg(0);
  Bytes out(size);
  in.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(size));
  if (!in) throw FormatError("failed reading " + path.string());
  return out;
}

void write_bytes(const std::filesystem::path& path, ByteView bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("failed writing " + path.string());
}

PointCloud read_cloud(const std::filesystem::path& path) {
  return with_path(path, [&] { return decode_cloud(read_bytes(path)); });
}
void write_cloud(const std::filesystem::path& path, const PointCloud& cloud) {
  write_bytes(path, encode_cloud(cloud));
}
LabelMap read_label_map(const std::filesystem::path& path) {
  return with_path(path, [&] { return decode_label_map(read_bytes(path)); });
}
void write_label_map(const std::filesystem::path& path, const LabelMap& map) {
  write_bytes(path, encode_label_map(map));
}
FeatureMap read_feature_map(const std::filesystem::path& path) {
  return with_path(path, [&] { return decode_feature_map(read_bytes(path)); });
}
void write_feature_map(const std::filesystem::path& path, const FeatureMap& map) {
  write_bytes(path, encode_feature_map(map));
}
SemanticScores read_scores(const std::filesystem::path& path) {
  return with_path(path, [&] { return decode_scores(read_bytes(path)); });
}
void write_scores(const std::filesystem::path& path, const SemanticScores& scores) {
  write_bytes(path, encode_scores(scores));
}
std::vector<std::uint32_t> read_labels(const std::filesystem::path& path) {
  return with_path(path, [&] { return decode_labels(read_bytes(path)); });
}
void write_labels(const std::filesystem::path& path, std::span<const std::uint32_t> labels) {
  write_bytes(path, encode_labels(labels));
}
TensorMatrix read_tensor(const std::filesystem::path& path) {
  return with_path(path, [&] { return decode_tensor(read_bytes(path)); });
}
void write_tensor(const std::filesystem::path& path, const TensorMatrix& tensor) {
  write_bytes(path, encode_tensor(tensor));
}
SuperpointIndex read_superpoints(const std::filesystem::path& path) {
  return with_path(path, [&] { return decode_superpoints(read_bytes(path)); });
}
void write_superpoints(const std::filesystem::path& path, const SuperpointIndex& index) {
  write_bytes(path, encode_superpoints(index));
}

std::uint64_t fnv1a64(ByteView bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::byte b : bytes) {
    h ^= static_cast<std::uint64_t>(b);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace fpt
