#pragma once

#include <filesystem>

#include "genreg/geometry.hpp"
#include "genreg/io_error.hpp"

namespace genreg {

// Two on-disk forms:
//   ASCII `.xyz`: one "x y z" line per point, meters.
//   Binary: "PCB1" + uint32 count (little-endian), then count float32 xyz triplets.
// Readers sniff the magic; writers pick binary unless the extension is `.xyz`.

PointCloud read_cloud(const std::filesystem::path& path);
void write_cloud(const std::filesystem::path& path, const PointCloud& cloud);

void write_cloud_xyz(const std::filesystem::path& path, const PointCloud& cloud);
void write_cloud_binary(const std::filesystem::path& path, const PointCloud& cloud);

}  // namespace genreg
