#include "genreg/geometry.hpp"

#include <Eigen/Geometry>
#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

namespace genreg {

RigidTransform RigidTransform::translate(double x, double y, double z) {
  RigidTransform t;
  t.translation = Vec3(x, y, z);
  return t;
}

RigidTransform RigidTransform::from_axis_angle(const Vec3& axis, double angle_rad, const Vec3& t) {
  RigidTransform out;
  out.rotation = Eigen::AngleAxisd(angle_rad, axis.normalized()).toRotationMatrix();
  out.translation = t;
  return out;
}

RigidTransform RigidTransform::inverse() const {
  RigidTransform out;
  out.rotation = rotation.transpose();
  out.translation = -(out.rotation * translation);
  return out;
}

RigidTransform RigidTransform::operator*(const RigidTransform& rhs) const {
  RigidTransform out;
  out.rotation = rotation * rhs.rotation;
  out.translation = rotation * rhs.translation + translation;
  return out;
}

Eigen::Matrix4d RigidTransform::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation;
  m.topRightCorner<3, 1>() = translation;
  return m;
}

bool RigidTransform::is_valid(double tol) const {
  if (!rotation.allFinite() || !translation.allFinite()) return false;
  const double ortho = (rotation.transpose() * rotation - Mat3::Identity()).norm();
  return ortho <= tol && std::abs(rotation.determinant() - 1.0) <= tol;
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) { return a * b; }
RigidTransform invert(const RigidTransform& t) { return t.inverse(); }

bool PointCloud::all_finite() const {
  return std::all_of(points.begin(), points.end(), [](const Vec3& p) { return p.allFinite(); });
}

PointCloud apply_transform(const RigidTransform& t, const PointCloud& c) {
  PointCloud out;
  out.points.resize(c.size());
  const auto n = static_cast<std::int64_t>(c.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) out.points[i] = t.apply(c.points[i]);
  return out;
}

std::size_t DepthMap::valid_count() const {
  return static_cast<std::size_t>(
      std::count_if(values.begin(), values.end(), [](double z) { return z > 0.0; }));
}

void PinholeCamera::validate() const {
  if (!(fx > 0 && fy > 0)) throw GeometryError("pinhole camera: focal lengths must be positive");
  if (width <= 0 || height <= 0) throw GeometryError("pinhole camera: image size must be positive");
  if (!(cx >= 0 && cx < width && cy >= 0 && cy < height))
    throw GeometryError("pinhole camera: principal point outside the image");
}

void FThetaCamera::validate() const {
  if (!(f > 0)) throw GeometryError("f-theta camera: f must be positive");
  if (!(theta_max > 0 && theta_max <= std::numbers::pi))
    throw GeometryError("f-theta camera: theta_max must lie in (0, pi]");
  if (width <= 0 || height <= 0) throw GeometryError("f-theta camera: image size must be positive");
  if (!(cx >= 0 && cx < width && cy >= 0 && cy < height))
    throw GeometryError("f-theta camera: image center outside the image");
}

namespace {

void check_dims(const DepthMap& d, int width, int height) {
  if (d.width != width || d.height != height ||
      d.values.size() != static_cast<std::size_t>(width) * height) {
    throw GeometryError("depth map is " + std::to_string(d.width) + "x" + std::to_string(d.height) +
                        " but camera expects " + std::to_string(width) + "x" +
                        std::to_string(height));
  }
}

template <typename PixelToPoint>
LiftedCloud lift_valid_pixels(const DepthMap& d, PixelToPoint&& to_point) {
  LiftedCloud out;
  out.cloud.points.reserve(d.valid_count());
  out.pixel_index.reserve(d.valid_count());
  for (int v = 0; v < d.height; ++v) {
    for (int u = 0; u < d.width; ++u) {
      const double z = d.at(u, v);
      if (!(z > 0.0)) continue;
      out.cloud.points.push_back(to_point(u, v, z));
      out.pixel_index.push_back(static_cast<std::int64_t>(v) * d.width + u);
    }
  }
  return out;
}

struct PixelHit {
  std::int64_t pixel = -1;
  double depth = 0.0;
};

// Serial z-buffer over precomputed hits; ascending index order with a strict
// comparison keeps the lowest index on equal depth.
RenderedDepth zbuffer(const std::vector<PixelHit>& hits, int width, int height) {
  RenderedDepth out{DepthMap(width, height),
                    std::vector<std::int64_t>(static_cast<std::size_t>(width) * height, -1)};
  for (std::size_t i = 0; i < hits.size(); ++i) {
    const PixelHit& h = hits[i];
    if (h.pixel < 0) continue;
    std::int64_t& owner = out.source_index[h.pixel];
    double& z = out.depth.values[h.pixel];
    if (owner < 0 || h.depth < z) {
      owner = static_cast<std::int64_t>(i);
      z = h.depth;
    }
  }
  return out;
}

std::int64_t pixel_of(double u, double v, int width, int height) {
  const double ur = std::floor(u + 0.5);
  const double vr = std::floor(v + 0.5);
  if (!(ur >= 0 && ur < width && vr >= 0 && vr < height)) return -1;
  return static_cast<std::int64_t>(vr) * width + static_cast<std::int64_t>(ur);
}

}  // namespace

LiftedCloud lift_depth(const DepthMap& d, const PinholeCamera& cam) {
  cam.validate();
  check_dims(d, cam.width, cam.height);
  return lift_valid_pixels(d, [&](int u, int v, double z) {
    return Vec3(z * (u - cam.cx) / cam.fx, z * (v - cam.cy) / cam.fy, z);
  });
}

LiftedCloud lift_ftheta(const DepthMap& d, const FThetaCamera& cam) {
  cam.validate();
  check_dims(d, cam.width, cam.height);
  return lift_valid_pixels(d, [&](int u, int v, double range) {
    const double du = u - cam.cx;
    const double dv = v - cam.cy;
    const double r = std::hypot(du, dv);
    if (r == 0.0) return Vec3(0.0, 0.0, range);
    const double theta = r / cam.f;
    const double s = std::sin(theta) / r;
    return Vec3(range * s * du, range * s * dv, range * std::cos(theta));
  });
}

RenderedDepth render_pinhole(const PointCloud& c, const PinholeCamera& cam) {
  cam.validate();
  std::vector<PixelHit> hits(c.size());
  const auto n = static_cast<std::int64_t>(c.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    const Vec3& p = c.points[i];
    if (!(p.z() > 0.0)) continue;
    const double u = cam.fx * p.x() / p.z() + cam.cx;
    const double v = cam.fy * p.y() / p.z() + cam.cy;
    hits[i] = {pixel_of(u, v, cam.width, cam.height), p.z()};
  }
  return zbuffer(hits, cam.width, cam.height);
}

RenderedDepth render_ftheta(const PointCloud& c, const FThetaCamera& cam) {
  cam.validate();
  std::vector<PixelHit> hits(c.size());
  const auto n = static_cast<std::int64_t>(c.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    const Vec3& p = c.points[i];
    const double range = p.norm();
    if (!(range > 0.0)) continue;
    const double rho = std::hypot(p.x(), p.y());
    const double theta = std::atan2(rho, p.z());
    if (theta > cam.theta_max) continue;
    const double r = cam.f * theta;
    double u = cam.cx, v = cam.cy;
    if (rho > 0.0) {
      u += r * p.x() / rho;
      v += r * p.y() / rho;
    }
    hits[i] = {pixel_of(u, v, cam.width, cam.height), range};
  }
  return zbuffer(hits, cam.width, cam.height);
}

DepthMap project_pinhole(const PointCloud& c, const PinholeCamera& cam) {
  return render_pinhole(c, cam).depth;
}

DepthMap project_ftheta(const PointCloud& c, const FThetaCamera& cam) {
  return render_ftheta(c, cam).depth;
}

Eigen::Matrix<std::int64_t, 3, 1> voxel_key(const Vec3& p, double voxel) {
  return {static_cast<std::int64_t>(std::floor(p.x() / voxel)),
          static_cast<std::int64_t>(std::floor(p.y() / voxel)),
          static_cast<std::int64_t>(std::floor(p.z() / voxel))};
}

PointCloud voxel_downsample(const PointCloud& c, double voxel) {
  if (!(voxel > 0.0)) throw GeometryError("voxel size must be positive");
  using Key = Eigen::Matrix<std::int64_t, 3, 1>;
  std::vector<Key> keys(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) keys[i] = voxel_key(c.points[i], voxel);

  // Sorting members by (key, coordinates) fixes the summation order, so the
  // centroids do not depend on the input order.
  std::vector<std::size_t> order(c.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto lex = [](const auto& a, const auto& b) {
    return std::lexicographical_compare(a.data(), a.data() + 3, b.data(), b.data() + 3);
  };
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (keys[a] != keys[b]) return lex(keys[a], keys[b]);
    return lex(c.points[a], c.points[b]);
  });

  PointCloud out;
  std::size_t begin = 0;
  while (begin < order.size()) {
    std::size_t end = begin;
    Vec3 sum = Vec3::Zero();
    while (end < order.size() && keys[order[end]] == keys[order[begin]]) {
      sum += c.points[order[end]];
      ++end;
    }
    out.points.push_back(sum / static_cast<double>(end - begin));
    begin = end;
  }
  return out;
}

}  // namespace genreg
