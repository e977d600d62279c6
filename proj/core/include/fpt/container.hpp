#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "fpt/geometry.hpp"
#include "fpt/scene_types.hpp"

namespace fpt {

class SuperpointIndex;

// FPT1 container, little-endian throughout:
//
//   offset  size  field
//   0       4     magic "FPT1" (the trailing digit is the format version)
//   4       1     kind tag (ContainerKind)
//   5       1     dtype tag (ContainerDType)
//   6       2     reserved, must be 0
//   8       32    dims[4], u64 each; dims beyond the kind's rank must be 0
//   40      ...   raw payload
//
// Payload per kind:
//   PointCloud       f64  dims {N, 3+L}     timestamp, then N rows of x y z attrs...
//   LabelMap         u32  dims {H, W}       H*W labels, row-major
//   FeatureMap       f64  dims {H, W, E}    H*W*E values, cell-major
//   SemanticScores   f64  dims {N, C, flag} N*C values; flag 1 = probabilities
//   Labels           u32  dims {N}          N class ids
//   Tensor           f64  dims {R, C}       R*C values, row-major
//   SuperpointIndex  u32  dims {N, M}       N group ids (0xFFFFFFFF = none),
//                                           then M x (camera, superpixel, area)
enum class ContainerKind : std::uint8_t {
  PointCloud = 1,
  LabelMap = 2,
  FeatureMap = 3,
  SemanticScores = 4,
  Labels = 5,
  Tensor = 6,
  SuperpointIndex = 7,
};

enum class ContainerDType : std::uint8_t { U32 = 1, F64 = 2 };

inline constexpr std::size_t kContainerHeaderSize = 40;

struct ContainerHeader {
  ContainerKind kind{};
  ContainerDType dtype{};
  std::array<std::uint64_t, 4> dims{};
};

using Bytes = std::vector<std::byte>;
using ByteView = std::span<const std::byte>;

using TensorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Parses and validates only the header (magic, version, tags, reserved).
ContainerHeader peek_header(ByteView bytes);

Bytes encode_cloud(const PointCloud& cloud);
PointCloud decode_cloud(ByteView bytes);
Bytes encode_label_map(const LabelMap& map);
LabelMap decode_label_map(ByteView bytes);
Bytes encode_feature_map(const FeatureMap& map);
FeatureMap decode_feature_map(ByteView bytes);
Bytes encode_scores(const SemanticScores& scores);
SemanticScores decode_scores(ByteView bytes);
Bytes encode_labels(std::span<const std::uint32_t> labels);
std::vector<std::uint32_t> decode_labels(ByteView bytes);
Bytes encode_tensor(const TensorMatrix& tensor);
TensorMatrix decode_tensor(ByteView bytes);
Bytes encode_superpoints(const SuperpointIndex& index);
SuperpointIndex decode_superpoints(ByteView bytes);

Bytes read_bytes(const std::filesystem::path& path);
void write_bytes(const std::filesystem::path& path, ByteView bytes);

// File wrappers; errors are prefixed with the path.
PointCloud read_cloud(const std::filesystem::path& path);
void write_cloud(const std::filesystem::path& path, const PointCloud& cloud);
LabelMap read_label_map(const std::filesystem::path& path);
void write_label_map(const std::filesystem::path& path, const LabelMap& map);
FeatureMap read_feature_map(const std::filesystem::path& path);
void write_feature_map(const std::filesystem::path& path, const FeatureMap& map);
SemanticScores read_scores(const std::filesystem::path& path);
void write_scores(const std::filesystem::path& path, const SemanticScores& scores);
std::vector<std::uint32_t> read_labels(const std::filesystem::path& path);
void write_labels(const std::filesystem::path& path, std::span<const std::uint32_t> labels);
TensorMatrix read_tensor(const std::filesystem::path& path);
void write_tensor(const std::filesystem::path& path, const TensorMatrix& tensor);
SuperpointIndex read_superpoints(const std::filesystem::path& path);
void write_superpoints(const std::filesystem::path& path, const SuperpointIndex& index);

/// 64-bit FNV-1a digest, used for artifact checksums in CLI summaries.
std::uint64_t fnv1a64(ByteView bytes);

}  // namespace fpt
