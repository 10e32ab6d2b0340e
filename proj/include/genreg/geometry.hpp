#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace genreg {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

class GeometryError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Rigid motion x -> R x + t.
struct RigidTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static RigidTransform identity() { return {}; }
  static RigidTransform translate(double x, double y, double z);
  /// Rotation of `angle_rad` about `axis` (normalized internally).
  static RigidTransform from_axis_angle(const Vec3& axis, double angle_rad,
                                        const Vec3& t = Vec3::Zero());

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
  RigidTransform inverse() const;
  /// `*this` applied after `rhs`.
  RigidTransform operator*(const RigidTransform& rhs) const;

  Eigen::Matrix4d matrix() const;
  /// ‖RᵀR − I‖_F ≤ tol and |det R − 1| ≤ tol.
  bool is_valid(double tol = 1e-9) const;
};

RigidTransform compose(const RigidTransform& a, const RigidTransform& b);
RigidTransform invert(const RigidTransform& t);

struct PointCloud {
  std::vector<Vec3> points;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  const Vec3& operator[](std::size_t i) const { return points[i]; }
  Vec3& operator[](std::size_t i) { return points[i]; }
  bool all_finite() const;
};

PointCloud apply_transform(const RigidTransform& t, const PointCloud& c);

/// Depth image in meters, row-major, 0 marks an invalid pixel.
struct DepthMap {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  DepthMap() = default;
  DepthMap(int w, int h) : width(w), height(h), values(static_cast<std::size_t>(w) * h, 0.0) {}

  double& at(int u, int v) { return values[static_cast<std::size_t>(v) * width + u]; }
  double at(int u, int v) const { return values[static_cast<std::size_t>(v) * width + u]; }
  std::size_t valid_count() const;
};

struct PinholeCamera {
  double fx = 0, fy = 0, cx = 0, cy = 0;
  int width = 0, height = 0;

  void validate() const;
};

/// Equidistant fisheye: image radius r = f·θ about (cx, cy).
struct FThetaCamera {
  double f = 0, cx = 0, cy = 0;
  double theta_max = 0;
  int width = 0, height = 0;

  void validate() const;
};

/// Cloud plus, for each point, the flat pixel index (v·width + u) it came from.
struct LiftedCloud {
  PointCloud cloud;
  std::vector<std::int64_t> pixel_index;
};

/// Depth map plus, for each pixel, the index of the winning input point (-1 if empty).
struct RenderedDepth {
  DepthMap depth;
  std::vector<std::int64_t> source_index;
};

LiftedCloud lift_depth(const DepthMap& d, const PinholeCamera& cam);
LiftedCloud lift_ftheta(const DepthMap& d, const FThetaCamera& cam);

/// Stores z (camera-frame depth). Points with z ≤ 0 or outside the image are dropped.
RenderedDepth render_pinhole(const PointCloud& c, const PinholeCamera& cam);
/// Stores Euclidean range. Points with ray angle above theta_max, zero range,
/// or outside the image are dropped.
RenderedDepth render_ftheta(const PointCloud& c, const FThetaCamera& cam);

DepthMap project_pinhole(const PointCloud& c, const PinholeCamera& cam);
DepthMap project_ftheta(const PointCloud& c, const FThetaCamera& cam);

/// Centroid per occupied voxel; output sorted by (ix, iy, iz).
PointCloud voxel_downsample(const PointCloud& c, double voxel);

/// Integer voxel coordinate of a point, floor(p / voxel).
Eigen::Matrix<std::int64_t, 3, 1> voxel_key(const Vec3& p, double voxel);

}  // namespace genreg
