#include "pcfill/projection.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "binary_io.h"
#include "pcfill/errors.h"

namespace pcfill {

static const char kDepthMagic[4] = {'D', 'M', 'B', '1'};
constexpr double kPi = 3.14159265358979323846;

CameraFrame camera_frame(const Viewpoint& vp) {
  const Vec3 axis = vp.look_at - vp.position;
  if (squared_norm(axis) == 0.0) {
    throw InvalidArgument("camera_frame: viewpoint position equals look_at");
  }
  const Vec3 forward = normalized(axis);
  // +Y up, falling back to +Z when the view axis is (anti)parallel to Y.
  Vec3 up_hint{0.0, 1.0, 0.0};
  if (std::abs(forward.x) < 1e-12 && std::abs(forward.z) < 1e-12) {
    up_hint = {0.0, 0.0, 1.0};
  }
  const Vec3 right = normalized(cross(forward, up_hint));
  const Vec3 up = cross(right, forward);
  return {right, up, forward};
}

std::array<Viewpoint, 3> orthogonal_viewpoints(double distance) {
  if (!(distance > 0.0)) throw InvalidArgument("orthogonal_viewpoints: distance must be positive");
  return {Viewpoint{{distance, 0.0, 0.0}}, Viewpoint{{0.0, distance, 0.0}},
          Viewpoint{{0.0, 0.0, distance}}};
}

std::vector<Viewpoint> projection_viewpoints(int n_views, double distance) {
  switch (n_views) {
    case 1:
      return {Viewpoint{{0.0, 0.0, distance}}};
    case 3: {
      const auto v = orthogonal_viewpoints(distance);
      return {v.begin(), v.end()};
    }
    case 6: {
      const auto v = orthogonal_viewpoints(distance);
      std::vector<Viewpoint> out(v.begin(), v.end());
      for (const auto& p : v) out.push_back(Viewpoint{p.position * -1.0, p.look_at});
      return out;
    }
    default:
      throw InvalidArgument("projection_viewpoints: n_views must be 1, 3, or 6");
  }
}

static void validate_params(const ProjectionParams& params) {
  if (params.resolution < 16) throw InvalidArgument("projection: resolution must be >= 16");
  if (params.densify_radius < 0 || params.densify_radius > 4) {
    throw InvalidArgument("projection: densify_radius must be in [0, 4]");
  }
  if (!(params.fov_degrees > 0.0 && params.fov_degrees < 180.0)) {
    throw InvalidArgument("projection: fov must be in (0, 180) degrees");
  }
}

DepthMap project_depth(const PointCloud& cloud, const Viewpoint& vp,
                       const ProjectionParams& params) {
  if (cloud.empty()) throw InvalidArgument("project_depth: empty cloud");
  validate_finite(cloud, "project_depth");
  validate_params(params);

  const CameraFrame cam = camera_frame(vp);
  const double half = std::tan(params.fov_degrees * kPi / 360.0);
  const int res = params.resolution;
  const int dr = params.densify_radius;

  DepthMap dm;
  dm.height = dm.width = res;
  dm.depth.assign(static_cast<std::size_t>(res) * res, 0.0f);
  dm.viewpoint = vp;

  std::size_t visible = 0;
  for (const auto& p : cloud) {
    const Vec3 d = p - vp.position;
    const double z = dot(d, cam.forward);
    if (z <= 0.0) continue;
    const double nx = dot(d, cam.right) / (z * half);
    const double ny = dot(d, cam.up) / (z * half);
    if (nx < -1.0 || nx > 1.0 || ny < -1.0 || ny > 1.0) continue;
    int col = static_cast<int>((nx + 1.0) * 0.5 * res);
    int row = static_cast<int>((1.0 - ny) * 0.5 * res);
    col = std::clamp(col, 0, res - 1);
    row = std::clamp(row, 0, res - 1);
    ++visible;
    const float depth = static_cast<float>(z);
    for (int rr = std::max(0, row - dr); rr <= std::min(res - 1, row + dr); ++rr) {
      for (int cc = std::max(0, col - dr); cc <= std::min(res - 1, col + dr); ++cc) {
        float& slot = dm.at(rr, cc);
        if (slot == 0.0f || depth < slot) slot = depth;
      }
    }
  }
  if (visible == 0) throw InvalidArgument("project_depth: every point falls outside the frustum");
  return dm;
}

PointCloud backproject(const DepthMap& dm, const ProjectionParams& params, double noise_sigma,
                       Rng* rng) {
  validate_params(params);
  const CameraFrame cam = camera_frame(dm.viewpoint);
  const double half = std::tan(params.fov_degrees * kPi / 360.0);
  PointCloud out;
  for (int row = 0; row < dm.height; ++row) {
    for (int col = 0; col < dm.width; ++col) {
      const float z = dm.at(row, col);
      if (z <= 0.0f) continue;
      // Pixel center back through the pinhole model.
      const double nx = (col + 0.5) * 2.0 / dm.width - 1.0;
      const double ny = 1.0 - (row + 0.5) * 2.0 / dm.height;
      Vec3 p = dm.viewpoint.position + cam.forward * static_cast<double>(z) +
               cam.right * (nx * half * z) + cam.up * (ny * half * z);
      if (noise_sigma > 0.0 && rng != nullptr) {
        p.x += noise_sigma * rng->gaussian();
        p.y += noise_sigma * rng->gaussian();
        p.z += noise_sigma * rng->gaussian();
      }
      out.push_back(p);
    }
  }
  if (out.empty()) throw InvalidArgument("backproject: depth map has no foreground pixels");
  return out;
}

void write_depth_dmb(const std::filesystem::path& path, const DepthMap& dm) {
  auto f = detail::open_out(path);
  detail::put_bytes(f, kDepthMagic, 4);
  detail::put<std::uint32_t>(f, static_cast<std::uint32_t>(dm.height));
  detail::put<std::uint32_t>(f, static_cast<std::uint32_t>(dm.width));
  const Vec3 pos = dm.viewpoint.position;
  const Vec3 tgt = dm.viewpoint.look_at;
  for (double v : {pos.x, pos.y, pos.z, tgt.x, tgt.y, tgt.z}) {
    detail::put<float>(f, static_cast<float>(v));
  }
  detail::put_bytes(f, dm.depth.data(), dm.depth.size() * sizeof(float));
  if (!f) throw InvalidArgument("write failed: " + path.string());
}

DepthMap read_depth_dmb(const std::filesystem::path& path) {
  const auto buf = detail::read_file(path);
  detail::ByteReader r(buf, path.string());
  r.expect_magic(kDepthMagic);
  DepthMap dm;
  dm.height = static_cast<int>(r.get<std::uint32_t>());
  dm.width = static_cast<int>(r.get<std::uint32_t>());
  float vp[6];
  r.get_floats(vp, 6);
  dm.viewpoint.position = {vp[0], vp[1], vp[2]};
  dm.viewpoint.look_at = {vp[3], vp[4], vp[5]};
  dm.depth.resize(static_cast<std::size_t>(dm.height) * dm.width);
  r.get_floats(dm.depth.data(), dm.depth.size());
  r.expect_end();
  for (float v : dm.depth) {
    if (!(v >= 0.0f) || !std::isfinite(v)) {
      throw FormatError(path.string() + ": negative or non-finite depth", 0);
    }
  }
  return dm;
}

void write_depth_pgm(const std::filesystem::path& path, const DepthMap& dm) {
  float maxd = 0.0f;
  for (float v : dm.depth) maxd = std::max(maxd, v);
  auto f = detail::open_out(path);
  char header[64];
  const int n = std::snprintf(header, sizeof(header), "P5\n%d %d\n65535\n", dm.width, dm.height);
  f.write(header, n);
  for (float v : dm.depth) {
    const auto level =
        static_cast<std::uint16_t>(maxd > 0.0f ? std::lround(v / maxd * 65535.0) : 0);
    // PGM 16-bit samples are big-endian.
    const unsigned char be[2] = {static_cast<unsigned char>(level >> 8),
                                 static_cast<unsigned char>(level & 0xff)};
    detail::put_bytes(f, be, 2);
  }
  if (!f) throw InvalidArgument("write failed: " + path.string());
}

}  // namespace pcfill
