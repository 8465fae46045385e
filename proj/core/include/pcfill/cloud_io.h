#pragma once

#include <filesystem>

#include "pcfill/geometry.h"

namespace pcfill {

// Two on-disk point cloud encodings:
//   text: one "x y z" line per point, LF-terminated, 9 significant digits
//   PCB1: magic "PCB1", u32 LE count, then N*3 float32 LE
// read_cloud/write_cloud dispatch on the extension: ".pcb" is binary,
// everything else is text.

PointCloud read_cloud_text(const std::filesystem::path& path);
void write_cloud_text(const std::filesystem::path& path, const PointCloud& cloud);

PointCloud read_cloud_pcb(const std::filesystem::path& path);
void write_cloud_pcb(const std::filesystem::path& path, const PointCloud& cloud);

PointCloud read_cloud(const std::filesystem::path& path);
void write_cloud(const std::filesystem::path& path, const PointCloud& cloud);

}  // namespace pcfill
