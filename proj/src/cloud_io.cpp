#include "genreg/cloud_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "binary_io.hpp"

namespace genreg {

namespace {

constexpr char kMagic[4] = {'P', 'C', 'B', '1'};

PointCloud read_binary(std::ifstream& in, const std::filesystem::path& path) {
  in.seekg(4);
  std::uint32_t count = 0;
  if (!detail::get_u32(in, count)) throw IoError(path.string() + ": truncated PCB1 header");
  std::vector<unsigned char> buf(static_cast<std::size_t>(count) * 12);
  if (!in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size())))
    throw IoError(path.string() + ": truncated PCB1 payload");
  PointCloud cloud;
  cloud.points.resize(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    const unsigned char* p = buf.data() + 12 * static_cast<std::size_t>(i);
    cloud.points[i] = Vec3(detail::f32_from(p), detail::f32_from(p + 4), detail::f32_from(p + 8));
  }
  return cloud;
}

PointCloud read_ascii(std::ifstream& in, const std::filesystem::path& path) {
  in.seekg(0);
  PointCloud cloud;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
    std::istringstream ls(line);
    double x, y, z;
    if (!(ls >> x >> y >> z))
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": expected 'x y z'");
    cloud.points.emplace_back(x, y, z);
  }
  if (!cloud.all_finite()) throw IoError(path.string() + ": non-finite coordinate");
  return cloud;
}

}  // namespace

PointCloud read_cloud(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open point cloud " + path.string());
  char magic[4] = {};
  in.read(magic, 4);
  const bool binary = in.gcount() == 4 && std::equal(magic, magic + 4, kMagic);
  in.clear();
  return binary ? read_binary(in, path) : read_ascii(in, path);
}

void write_cloud_xyz(const std::filesystem::path& path, const PointCloud& cloud) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw IoError("cannot write " + path.string());
  for (const Vec3& p : cloud.points) std::fprintf(f, "%.17g %.17g %.17g\n", p.x(), p.y(), p.z());
  std::fclose(f);
}

void write_cloud_binary(const std::filesystem::path& path, const PointCloud& cloud) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(kMagic, 4);
  detail::put_u32(out, static_cast<std::uint32_t>(cloud.size()));
  for (const Vec3& p : cloud.points) {
    detail::put_f32(out, static_cast<float>(p.x()));
    detail::put_f32(out, static_cast<float>(p.y()));
    detail::put_f32(out, static_cast<float>(p.z()));
  }
  if (!out) throw IoError("write failed: " + path.string());
}

void write_cloud(const std::filesystem::path& path, const PointCloud& cloud) {
  if (path.extension() == ".xyz")
    write_cloud_xyz(path, cloud);
  else
    write_cloud_binary(path, cloud);
}

}  // namespace genreg
