#pragma once

#include <filesystem>
#include <variant>

#include "genreg/geometry.hpp"
#include "genreg/io_error.hpp"

namespace genreg {

using CameraModel = std::variant<PinholeCamera, FThetaCamera>;

int camera_width(const CameraModel& cam);
int camera_height(const CameraModel& cam);

// JSON sidecar: {width, height, model: "pinhole"|"ftheta", fx|f, fy, cx, cy, theta_max?}
CameraModel read_camera_sidecar(const std::filesystem::path& path);
void write_camera_sidecar(const std::filesystem::path& path, const CameraModel& cam);

/// 16-bit grayscale PNG (millimeters) is detected by signature; anything else
/// is read as raw little-endian float32 meters of width·height values.
DepthMap read_depth(const std::filesystem::path& path, int width, int height);

/// Millimeters, rounded to nearest and saturated at 65535.
void write_depth_png(const std::filesystem::path& path, const DepthMap& d);
void write_depth_raw(const std::filesystem::path& path, const DepthMap& d);
/// `.png` → PNG, otherwise raw float32.
void write_depth(const std::filesystem::path& path, const DepthMap& d);

LiftedCloud lift(const DepthMap& d, const CameraModel& cam);
DepthMap project(const PointCloud& c, const CameraModel& cam);

}  // namespace genreg
