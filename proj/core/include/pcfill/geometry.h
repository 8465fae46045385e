#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "pcfill/vec3.h"

namespace pcfill {

// A point cloud is an ordered list of 3D points in normalized model
// coordinates. Order matters: every kernel below documents how it maps
// input indices to output indices, and all tie-breaking is by lower index
// so repeated runs are bit-identical.
using PointCloud = std::vector<Vec3>;

using IndexSet = std::vector<std::uint32_t>;

struct Viewpoint {
  Vec3 position;
  Vec3 look_at{0.0, 0.0, 0.0};
};

// k nearest reference points for every query point, exact (no
// approximation). Each result is sorted ascending by (distance, index).
// Throws InvalidArgument if k < 1, k > reference size, or a cloud is empty.
std::vector<IndexSet> knn(const PointCloud& query, const PointCloud& reference, int k);

// Greedy farthest point sampling. The seed is index 0 and every later pick
// maximizes the minimum distance to the already-selected set, lower index
// winning ties, so fps(cloud, m) is a prefix of fps(cloud, m + 1).
IndexSet fps(const PointCloud& cloud, int m);

struct CropResult {
  PointCloud partial;  // n_keep points, fps pick order
  PointCloud missing;  // n_missing points, ascending original index
};

// Benchmark cropping protocol: drop the n_missing points farthest from the
// viewpoint (ties keep the lower index), then fps-downsample the remainder
// to n_keep.
CropResult viewpoint_crop(const PointCloud& gt, const Viewpoint& vp, int n_missing, int n_keep);

// The 8 evaluation viewpoints: corners of {-1,+1}^3 in lexicographic order,
// all looking at the origin.
std::array<Viewpoint, 8> fixed_test_viewpoints();

// Concatenates coarse points then partial points and fps-downsamples the
// union to n0.
PointCloud merge_resample(const PointCloud& coarse, const PointCloud& partial, int n0);

// Per-query minimum Euclidean distance to the anchor set (unscaled).
std::vector<double> nearest_distance_field(const PointCloud& query, const PointCloud& anchor);

struct NormalizeTransform {
  Vec3 center;   // bounding-box center of the input
  double scale;  // factor applied after centering; original = p / scale + center
};

struct NormalizeResult {
  PointCloud cloud;
  NormalizeTransform transform;
};

// Centers the axis-aligned bounding box at the origin and scales uniformly
// so the largest half-extent equals half_extent. Degenerate clouds (zero
// extent) are rejected.
NormalizeResult normalize(const PointCloud& cloud, double half_extent);

PointCloud gather(const PointCloud& cloud, const IndexSet& indices);

// Throws InvalidArgument when any coordinate is NaN/Inf; `what` names the
// offending cloud in the message.
void validate_finite(const PointCloud& cloud, const char* what);

}  // namespace pcfill
