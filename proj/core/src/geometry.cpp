#include "fpt/geometry.hpp"

#include <Eigen/LU>

#include <cmath>
#include <string>

#include "fpt/error.hpp"

namespace fpt {

namespace {

void check_rotation(const Mat3& r) {
  if (!r.allFinite()) throw InvalidArgument("rotation contains non-finite entries");
  const double orth = (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff();
  if (orth > kRotationTolerance)
    throw InvalidArgument("rotation is not orthonormal (max |R^T R - I| = " + std::to_string(orth) +
                          ")");
  const double det = r.determinant();
  if (std::abs(det - 1.0) > kRotationTolerance)
    throw InvalidArgument("rotation determinant is " + std::to_string(det) + ", expected +1");
}

}  // namespace

RigidTransform::RigidTransform() : rotation_(Mat3::Identity()), translation_(Vec3::Zero()) {}

RigidTransform::RigidTransform(const Mat3& rotation, const Vec3& translation)
    : rotation_(rotation), translation_(translation) {
  check_rotation(rotation_);
  if (!translation_.allFinite()) throw InvalidArgument("translation contains non-finite entries");
}

RigidTransform RigidTransform::from_matrix(const Mat4& m) {
  if (m(3, 0) != 0.0 || m(3, 1) != 0.0 || m(3, 2) != 0.0 || m(3, 3) != 1.0)
    throw InvalidArgument("homogeneous transform must have bottom row (0, 0, 0, 1)");
  return RigidTransform(m.topLeftCorner<3, 3>(), m.topRightCorner<3, 1>());
}

RigidTransform RigidTransform::from_yaw(double yaw, const Vec3& translation) {
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  Mat3 r;
  r << c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0;
  return RigidTransform(r, translation);
}

Mat4 RigidTransform::matrix() const {
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() = rotation_;
  m.topRightCorner<3, 1>() = translation_;
  return m;
}

RigidTransform RigidTransform::inverse() const {
  const Mat3 rt = rotation_.transpose();
  return RigidTransform(Trusted{}, rt, -(rt * translation_));
}

bool RigidTransform::is_identity() const {
  return rotation_ == Mat3::Identity() && translation_ == Vec3::Zero();
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  return RigidTransform(RigidTransform::Trusted{}, a.rotation_ * b.rotation_,
                        a.rotation_ * b.translation_ + a.translation_);
}

CameraIntrinsics::CameraIntrinsics(const Mat3& matrix, std::uint32_t width, std::uint32_t height)
    : matrix_(matrix), width_(width), height_(height) {
  if (!matrix_.allFinite()) throw InvalidArgument("intrinsic matrix contains non-finite entries");
  if (matrix_(2, 0) != 0.0 || matrix_(2, 1) != 0.0 || matrix_(2, 2) != 1.0)
    throw InvalidArgument("intrinsic matrix last row must be (0, 0, 1)");
  if (!(matrix_(0, 0) > 0.0) || !(matrix_(1, 1) > 0.0))
    throw InvalidArgument("intrinsic focal lengths must be positive");
  if (width_ == 0 || height_ == 0) throw InvalidArgument("image dimensions must be positive");
}

PointCloud::PointCloud(CoordMatrix coords, AttrMatrix attrs, double timestamp)
    : coords_(std::move(coords)), attrs_(std::move(attrs)), timestamp_(timestamp) {
  if (attrs_.rows() != coords_.rows())
    throw InvalidArgument("attribute rows (" + std::to_string(attrs_.rows()) +
                          ") differ from point count (" + std::to_string(coords_.rows()) + ")");
  if (!coords_.allFinite()) throw InvalidArgument("point coordinates contain non-finite values");
}

PointCloud::PointCloud(CoordMatrix coords, double timestamp)
    : PointCloud(coords, AttrMatrix(coords.rows(), 0), timestamp) {}

PointCloud PointCloud::without_attr(Eigen::Index col) const {
  if (col < 0 || col >= attrs_.cols()) throw InvalidArgument("attribute column out of range");
  AttrMatrix out(attrs_.rows(), attrs_.cols() - 1);
  out.leftCols(col) = attrs_.leftCols(col);
  out.rightCols(attrs_.cols() - col - 1) = attrs_.rightCols(attrs_.cols() - col - 1);
  return PointCloud(coords_, std::move(out), timestamp_);
}

std::vector<PixelProjection> project_points(const PointCloud& cloud, const CameraIntrinsics& cam,
                                            const RigidTransform& extrinsic,
                                            std::uint32_t camera_index) {
  std::vector<PixelProjection> out;
  const Mat3& k = cam.matrix();
  const double width = cam.width();
  const double height = cam.height();
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3 pc = extrinsic.apply(cloud.point(i));
    const double z = pc.z();
    if (!(z > 0.0)) continue;
    const Vec3 h = k * pc;
    const double u = h.x() / z;
    const double v = h.y() / z;
    if (!(u >= 0.0 && u < width && v >= 0.0 && v < height)) continue;
    out.push_back({i, camera_index, u, v, z});
  }
  return out;
}

Vec3 unproject(const PixelProjection& proj, const CameraIntrinsics& cam,
               const RigidTransform& extrinsic) {
  const Vec3 ray = cam.matrix().inverse() * Vec3(proj.u, proj.v, 1.0);
  return extrinsic.inverse().apply(proj.depth * ray);
}

PointCloud transform_cloud(const PointCloud& cloud, const RigidTransform& t) {
  if (t.is_identity()) return cloud;
  CoordMatrix out(cloud.coords().rows(), 3);
  for (Eigen::Index i = 0; i < out.rows(); ++i)
    out.row(i) = t.apply(cloud.coords().row(i).transpose()).transpose();
  return PointCloud(std::move(out), cloud.attrs(), cloud.timestamp());
}

PointCloud aggregate_sweeps(const PointCloud& keyframe,
                            const std::vector<std::pair<PointCloud, RigidTransform>>& sweeps) {
  const Eigen::Index width = keyframe.attr_width();
  Eigen::Index total = keyframe.coords().rows();
  for (std::size_t s = 0; s < sweeps.size(); ++s) {
    if (sweeps[s].first.attr_width() != width)
      throw InvalidArgument("sweep " + std::to_string(s) + " has " +
                            std::to_string(sweeps[s].first.attr_width()) +
                            " attribute columns, keyframe has " + std::to_string(width));
    total += sweeps[s].first.coords().rows();
  }

  CoordMatrix coords(total, 3);
  AttrMatrix attrs(total, width + 1);
  Eigen::Index row = 0;
  auto append = [&](const PointCloud& cloud, double provenance) {
    const Eigen::Index n = cloud.coords().rows();
    coords.middleRows(row, n) = cloud.coords();
    attrs.block(row, 0, n, width) = cloud.attrs();
    attrs.block(row, width, n, 1).setConstant(provenance);
    row += n;
  };
  append(keyframe, kKeyframeProvenance);
  for (std::size_t s = 0; s < sweeps.size(); ++s)
    append(transform_cloud(sweeps[s].first, sweeps[s].second), static_cast<double>(s + 1));
  return PointCloud(std::move(coords), std::move(attrs), keyframe.timestamp());
}

}  // namespace fpt
