#include "pcfill/cloud_io.h"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "binary_io.h"
#include "pcfill/errors.h"

namespace pcfill {

static const char kCloudMagic[4] = {'P', 'C', 'B', '1'};

PointCloud read_cloud_text(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw InvalidArgument("cannot open: " + path.string());
  PointCloud cloud;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    Vec3 p;
    if (!(ss >> p.x >> p.y >> p.z)) {
      throw InvalidArgument(path.string() + ":" + std::to_string(lineno) +
                            ": expected \"x y z\"");
    }
    std::string rest;
    if (ss >> rest) {
      throw InvalidArgument(path.string() + ":" + std::to_string(lineno) +
                            ": trailing content \"" + rest + "\"");
    }
    cloud.push_back(p);
  }
  if (cloud.empty()) throw InvalidArgument(path.string() + ": no points");
  validate_finite(cloud, path.string().c_str());
  return cloud;
}

void write_cloud_text(const std::filesystem::path& path, const PointCloud& cloud) {
  auto f = detail::open_out(path);
  char buf[128];
  for (const auto& p : cloud) {
    const int n = std::snprintf(buf, sizeof(buf), "%.9g %.9g %.9g\n", p.x, p.y, p.z);
    f.write(buf, n);
  }
  if (!f) throw InvalidArgument("write failed: " + path.string());
}

PointCloud read_cloud_pcb(const std::filesystem::path& path) {
  const auto buf = detail::read_file(path);
  detail::ByteReader r(buf, path.string());
  r.expect_magic(kCloudMagic);
  const auto count = r.get<std::uint32_t>();
  PointCloud cloud;
  cloud.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    float xyz[3];
    r.get_floats(xyz, 3);
    cloud.push_back({xyz[0], xyz[1], xyz[2]});
  }
  r.expect_end();
  validate_finite(cloud, path.string().c_str());
  return cloud;
}

void write_cloud_pcb(const std::filesystem::path& path, const PointCloud& cloud) {
  auto f = detail::open_out(path);
  detail::put_bytes(f, kCloudMagic, 4);
  detail::put<std::uint32_t>(f, static_cast<std::uint32_t>(cloud.size()));
  for (const auto& p : cloud) {
    const float xyz[3] = {static_cast<float>(p.x), static_cast<float>(p.y),
                          static_cast<float>(p.z)};
    detail::put_bytes(f, xyz, sizeof(xyz));
  }
  if (!f) throw InvalidArgument("write failed: " + path.string());
}

PointCloud read_cloud(const std::filesystem::path& path) {
  return path.extension() == ".pcb" ? read_cloud_pcb(path) : read_cloud_text(path);
}

void write_cloud(const std::filesystem::path& path, const PointCloud& cloud) {
  if (path.extension() == ".pcb") {
    write_cloud_pcb(path, cloud);
  } else {
    write_cloud_text(path, cloud);
  }
}

}  // namespace pcfill
