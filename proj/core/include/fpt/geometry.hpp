#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace fpt {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using CoordMatrix = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;
using AttrMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Tolerance used to accept a rotation matrix (orthonormality and det = +1).
inline constexpr double kRotationTolerance = 1e-9;

/// Proper rigid motion p -> R p + t.
///
/// Construction validates the rotation; invalid matrices are rejected rather
/// than re-orthonormalized.
class RigidTransform {
 public:
  /// Identity.
  RigidTransform();
  RigidTransform(const Mat3& rotation, const Vec3& translation);

  /// From a homogeneous 4x4 matrix whose bottom row must be (0, 0, 0, 1).
  static RigidTransform from_matrix(const Mat4& m);
  /// Rotation about +z by `yaw` radians followed by a translation.
  static RigidTransform from_yaw(double yaw, const Vec3& translation);

  const Mat3& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }
  Mat4 matrix() const;

  /// R p + t, each row summed left to right.
  Vec3 apply(const Vec3& p) const {
    Vec3 out;
    for (int i = 0; i < 3; ++i)
      out[i] = ((rotation_(i, 0) * p[0] + rotation_(i, 1) * p[1]) + rotation_(i, 2) * p[2]) +
               translation_[i];
    return out;
  }
  RigidTransform inverse() const;
  bool is_identity() const;

  friend RigidTransform compose(const RigidTransform& a, const RigidTransform& b);

 private:
  struct Trusted {};
  RigidTransform(Trusted, const Mat3& rotation, const Vec3& translation)
      : rotation_(rotation), translation_(translation) {}

  Mat3 rotation_;
  Vec3 translation_;
};

/// Transform equivalent to applying `b` first, then `a`.
RigidTransform compose(const RigidTransform& a, const RigidTransform& b);

/// Pinhole intrinsics: 3x3 matrix with last row (0, 0, 1) and positive focals.
class CameraIntrinsics {
 public:
  CameraIntrinsics(const Mat3& matrix, std::uint32_t width, std::uint32_t height);

  const Mat3& matrix() const { return matrix_; }
  std::uint32_t width() const { return width_; }
  std::uint32_t height() const { return height_; }

 private:
  Mat3 matrix_;
  std::uint32_t width_;
  std::uint32_t height_;
};

/// A camera together with its LiDAR-to-camera extrinsic transform.
struct CalibratedCamera {
  CameraIntrinsics intrinsics;
  RigidTransform extrinsic;
};

/// N points with xyz coordinates, N x L per-point attributes and a capture time.
class PointCloud {
 public:
  PointCloud() = default;
  /// Rejects non-finite coordinates and attribute row counts != N.
  PointCloud(CoordMatrix coords, AttrMatrix attrs, double timestamp = 0.0);
  /// Cloud with zero attribute columns.
  explicit PointCloud(CoordMatrix coords, double timestamp = 0.0);

  std::size_t size() const { return static_cast<std::size_t>(coords_.rows()); }
  bool empty() const { return coords_.rows() == 0; }
  Eigen::Index attr_width() const { return attrs_.cols(); }
  const CoordMatrix& coords() const { return coords_; }
  const AttrMatrix& attrs() const { return attrs_; }
  double timestamp() const { return timestamp_; }
  Vec3 point(std::size_t i) const { return coords_.row(static_cast<Eigen::Index>(i)).transpose(); }

  /// Copy with attribute column `col` removed.
  PointCloud without_attr(Eigen::Index col) const;

 private:
  CoordMatrix coords_ = CoordMatrix(0, 3);
  AttrMatrix attrs_ = AttrMatrix(0, 0);
  double timestamp_ = 0.0;
};

struct PixelProjection {
  std::size_t point_index = 0;
  std::uint32_t camera_index = 0;
  double u = 0.0;  // continuous pixel column
  double v = 0.0;  // continuous pixel row
  double depth = 0.0;
};

/// Projects every point through extrinsic then intrinsic matrix and keeps
/// those with camera depth > 0 landing in [0, width) x [0, height).
/// Output is ordered by point index.
std::vector<PixelProjection> project_points(const PointCloud& cloud, const CameraIntrinsics& cam,
                                            const RigidTransform& extrinsic,
                                            std::uint32_t camera_index = 0);

/// Inverse of project_points for a single projection: pixel + depth back to
/// the LiDAR frame.
Vec3 unproject(const PixelProjection& proj, const CameraIntrinsics& cam,
               const RigidTransform& extrinsic);

/// Integer pixel holding a continuous projection (floor rounding).
inline std::pair<std::uint32_t, std::uint32_t> pixel_of(const PixelProjection& p) {
  return {static_cast<std::uint32_t>(p.u), static_cast<std::uint32_t>(p.v)};
}

PointCloud transform_cloud(const PointCloud& cloud, const RigidTransform& t);

/// Provenance value stored in the last attribute column of aggregate_sweeps
/// output: 0 for keyframe points, s + 1 for points of sweep s.
inline constexpr double kKeyframeProvenance = 0.0;

/// Builds a dense cloud: keyframe points first (unchanged), then every sweep
/// mapped into the keyframe frame by its sweep-to-keyframe transform. A
/// provenance column is appended to the attributes.
PointCloud aggregate_sweeps(const PointCloud& keyframe,
                            const std::vector<std::pair<PointCloud, RigidTransform>>& sweeps);

}  // namespace fpt
