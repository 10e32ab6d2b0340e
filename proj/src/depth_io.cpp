#include "genreg/depth_io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <fstream>
#include <memory>
#include <numbers>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "binary_io.hpp"

namespace genreg {

using nlohmann::json;

int camera_width(const CameraModel& cam) {
  return std::visit([](const auto& c) { return c.width; }, cam);
}

int camera_height(const CameraModel& cam) {
  return std::visit([](const auto& c) { return c.height; }, cam);
}

namespace {

template <typename T>
T required(const json& j, const char* key, const std::filesystem::path& path) {
  if (!j.contains(key)) throw IoError(path.string() + ": camera sidecar missing '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw IoError(path.string() + ": camera sidecar field '" + key + "' has the wrong type");
  }
}

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

DepthMap read_png16(const std::filesystem::path& path, int width, int height) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw IoError("cannot open depth " + path.string());
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("libpng initialisation failed");
  }
  std::vector<std::uint16_t> pixels;
  std::vector<png_bytep> rows;
  png_uint_32 w = 0, h = 0;
  int bit_depth = 0, color_type = 0;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError(path.string() + ": corrupt PNG");
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);
  png_get_IHDR(png, info, &w, &h, &bit_depth, &color_type, nullptr, nullptr, nullptr);
  const bool ok = bit_depth == 16 && color_type == PNG_COLOR_TYPE_GRAY;
  if (ok && static_cast<int>(w) == width && static_cast<int>(h) == height) {
    if (std::endian::native == std::endian::little) png_set_swap(png);
    pixels.resize(static_cast<std::size_t>(w) * h);
    rows.resize(h);
    for (png_uint_32 r = 0; r < h; ++r) rows[r] = reinterpret_cast<png_bytep>(&pixels[r * w]);
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
  }
  png_destroy_read_struct(&png, &info, nullptr);
  if (!ok) throw IoError(path.string() + ": depth PNG must be 16-bit grayscale");
  if (static_cast<int>(w) != width || static_cast<int>(h) != height)
    throw IoError(path.string() + ": PNG is " + std::to_string(w) + "x" + std::to_string(h) +
                  ", sidecar says " + std::to_string(width) + "x" + std::to_string(height));
  DepthMap d(width, height);
  for (std::size_t i = 0; i < pixels.size(); ++i) d.values[i] = pixels[i] * 1e-3;
  return d;
}

DepthMap read_raw(const std::filesystem::path& path, int width, int height) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open depth " + path.string());
  const std::size_t n = static_cast<std::size_t>(width) * height;
  std::vector<unsigned char> buf(4 * n);
  if (!in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size())))
    throw IoError(path.string() + ": raw depth shorter than " + std::to_string(width) + "x" +
                  std::to_string(height) + " float32");
  DepthMap d(width, height);
  for (std::size_t i = 0; i < n; ++i) {
    const double z = detail::f32_from(buf.data() + 4 * i);
    if (!std::isfinite(z) || z < 0) throw IoError(path.string() + ": invalid depth value");
    d.values[i] = z;
  }
  return d;
}

}  // namespace

CameraModel read_camera_sidecar(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("camera sidecar not found: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw IoError(path.string() + ": invalid JSON: " + e.what());
  }
  const auto model = required<std::string>(j, "model", path);
  const int width = required<int>(j, "width", path);
  const int height = required<int>(j, "height", path);
  CameraModel cam;
  if (model == "pinhole") {
    PinholeCamera c;
    c.fx = required<double>(j, "fx", path);
    c.fy = required<double>(j, "fy", path);
    c.cx = required<double>(j, "cx", path);
    c.cy = required<double>(j, "cy", path);
    c.width = width;
    c.height = height;
    cam = c;
  } else if (model == "ftheta") {
    FThetaCamera c;
    c.f = required<double>(j, "f", path);
    c.cx = required<double>(j, "cx", path);
    c.cy = required<double>(j, "cy", path);
    c.theta_max = j.value("theta_max", std::numbers::pi / 2);
    c.width = width;
    c.height = height;
    cam = c;
  } else {
    throw IoError(path.string() + ": unknown camera model '" + model + "'");
  }
  try {
    std::visit([](const auto& c) { c.validate(); }, cam);
  } catch (const GeometryError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
  return cam;
}

void write_camera_sidecar(const std::filesystem::path& path, const CameraModel& cam) {
  json j;
  if (const auto* p = std::get_if<PinholeCamera>(&cam)) {
    j = {{"model", "pinhole"}, {"width", p->width}, {"height", p->height}, {"fx", p->fx},
         {"fy", p->fy},        {"cx", p->cx},       {"cy", p->cy}};
  } else {
    const auto& f = std::get<FThetaCamera>(cam);
    j = {{"model", "ftheta"}, {"width", f.width}, {"height", f.height}, {"f", f.f},
         {"cx", f.cx},        {"cy", f.cy},       {"theta_max", f.theta_max}};
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

DepthMap read_depth(const std::filesystem::path& path, int width, int height) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw IoError("cannot open depth " + path.string());
  unsigned char sig[8] = {};
  probe.read(reinterpret_cast<char*>(sig), 8);
  const bool is_png = probe.gcount() == 8 && png_sig_cmp(sig, 0, 8) == 0;
  probe.close();
  return is_png ? read_png16(path, width, height) : read_raw(path, width, height);
}

void write_depth_png(const std::filesystem::path& path, const DepthMap& d) {
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw IoError("cannot write " + path.string());
  std::vector<std::uint16_t> pixels(d.values.size());
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    const double mm = std::floor(d.values[i] * 1e3 + 0.5);
    pixels[i] = static_cast<std::uint16_t>(std::clamp(mm, 0.0, 65535.0));
  }
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw IoError("libpng initialisation failed");
  }
  std::vector<png_bytep> rows(d.height);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("PNG write failed: " + path.string());
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, d.width, d.height, 16, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  if (std::endian::native == std::endian::little) png_set_swap(png);
  for (int r = 0; r < d.height; ++r)
    rows[r] = reinterpret_cast<png_bytep>(&pixels[static_cast<std::size_t>(r) * d.width]);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

void write_depth_raw(const std::filesystem::path& path, const DepthMap& d) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  for (double z : d.values) detail::put_f32(out, static_cast<float>(z));
  if (!out) throw IoError("write failed: " + path.string());
}

void write_depth(const std::filesystem::path& path, const DepthMap& d) {
  if (path.extension() == ".png")
    write_depth_png(path, d);
  else
    write_depth_raw(path, d);
}

LiftedCloud lift(const DepthMap& d, const CameraModel& cam) {
  return std::visit(
      [&](const auto& c) {
        if constexpr (std::is_same_v<std::decay_t<decltype(c)>, PinholeCamera>)
          return lift_depth(d, c);
        else
          return lift_ftheta(d, c);
      },
      cam);
}

DepthMap project(const PointCloud& c, const CameraModel& cam) {
  return std::visit(
      [&](const auto& m) {
        if constexpr (std::is_same_v<std::decay_t<decltype(m)>, PinholeCamera>)
          return project_pinhole(c, m);
        else
          return project_ftheta(c, m);
      },
      cam);
}

}  // namespace genreg
