#pragma once

#include <array>
#include <filesystem>
#include <vector>

#include "pcfill/geometry.h"
#include "pcfill/rng.h"

namespace pcfill {

struct ProjectionParams {
  int resolution = 224;          // square image, pixels
  double camera_distance = 0.7;  // model units from origin
  int densify_radius = 1;        // half-width of the square splat, pixels
  double fov_degrees = 60.0;
};

// Depth image rendered from a point cloud. depth is row-major, 0 encodes
// background, positive values are the distance from the camera along the
// principal axis.
struct DepthMap {
  int height = 0;
  int width = 0;
  std::vector<float> depth;
  Viewpoint viewpoint;

  float& at(int row, int col) { return depth[static_cast<std::size_t>(row) * width + col]; }
  float at(int row, int col) const { return depth[static_cast<std::size_t>(row) * width + col]; }
};

// Orthonormal camera basis. The camera looks along `forward`; `up` is +Y
// unless the view axis is (anti)parallel to Y, in which case +Z.
struct CameraFrame {
  Vec3 right;
  Vec3 up;
  Vec3 forward;
};
CameraFrame camera_frame(const Viewpoint& vp);

// Viewpoints on the +X/+Y/+Z axes at the given distance, looking at the
// origin.
std::array<Viewpoint, 3> orthogonal_viewpoints(double distance);

// View sets used by the pipeline: 1 = front (+Z), 3 = orthogonal axes,
// 6 = both signs of each axis.
std::vector<Viewpoint> projection_viewpoints(int n_views, double distance);

// Pinhole projection with min-depth compositing. Every point splats a
// (2*densify_radius+1)^2 pixel block; out-of-frustum points are dropped,
// and dropping all of them is an error.
DepthMap project_depth(const PointCloud& cloud, const Viewpoint& vp, const ProjectionParams& params);

// Inverse of project_depth at pixel centers: one point per nonzero pixel,
// in row-major pixel order. Optional zero-mean Gaussian noise of standard
// deviation noise_sigma is added per coordinate when rng is provided.
PointCloud backproject(const DepthMap& dm, const ProjectionParams& params,
                       double noise_sigma = 0.0, Rng* rng = nullptr);

// DMB1 container: magic "DMB1", u32 H, u32 W, 3*f32 position, 3*f32
// look_at, then H*W float32 LE row-major depths.
void write_depth_dmb(const std::filesystem::path& path, const DepthMap& dm);
DepthMap read_depth_dmb(const std::filesystem::path& path);

// 16-bit PGM preview, depths scaled linearly to [0, 65535].
void write_depth_pgm(const std::filesystem::path& path, const DepthMap& dm);

}  // namespace pcfill
