#include "pcfill/geometry.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "pcfill/errors.h"
#include "pcfill/parallel.h"

namespace pcfill {

void validate_finite(const PointCloud& cloud, const char* what) {
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (!is_finite(cloud[i])) {
      throw InvalidArgument(std::string(what) + ": non-finite coordinate at point " +
                            std::to_string(i));
    }
  }
}

PointCloud gather(const PointCloud& cloud, const IndexSet& indices) {
  PointCloud out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back(cloud[i]);
  return out;
}

std::vector<IndexSet> knn(const PointCloud& query, const PointCloud& reference, int k) {
  if (query.empty() || reference.empty()) {
    throw InvalidArgument("knn: empty cloud");
  }
  if (k < 1 || static_cast<std::size_t>(k) > reference.size()) {
    throw InvalidArgument("knn: k=" + std::to_string(k) + " out of range for reference of " +
                          std::to_string(reference.size()) + " points");
  }
  std::vector<IndexSet> out(query.size());
  parallel_for(query.size(), [&](std::size_t qi) {
    // (squared distance, index) pairs; ordering by squared distance is the
    // same as by distance, ties resolved by lower index.
    std::vector<std::pair<double, std::uint32_t>> cand(reference.size());
    for (std::size_t ri = 0; ri < reference.size(); ++ri) {
      cand[ri] = {squared_distance(query[qi], reference[ri]), static_cast<std::uint32_t>(ri)};
    }
    std::partial_sort(cand.begin(), cand.begin() + k, cand.end());
    IndexSet ids(k);
    for (int j = 0; j < k; ++j) ids[j] = cand[j].second;
    out[qi] = std::move(ids);
  });
  return out;
}

IndexSet fps(const PointCloud& cloud, int m) {
  if (cloud.empty()) throw InvalidArgument("fps: empty cloud");
  if (m < 1 || static_cast<std::size_t>(m) > cloud.size()) {
    throw InvalidArgument("fps: m=" + std::to_string(m) + " out of range for cloud of " +
                          std::to_string(cloud.size()) + " points");
  }
  const std::size_t n = cloud.size();
  IndexSet picks;
  picks.reserve(m);
  picks.push_back(0);  // fixed seed point
  std::vector<double> min_sq(n);
  for (std::size_t i = 0; i < n; ++i) min_sq[i] = squared_distance(cloud[i], cloud[0]);
  for (int round = 1; round < m; ++round) {
    std::uint32_t best = 0;
    double best_sq = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (min_sq[i] > best_sq) {  // strict: ties keep the lower index
        best_sq = min_sq[i];
        best = static_cast<std::uint32_t>(i);
      }
    }
    picks.push_back(best);
    for (std::size_t i = 0; i < n; ++i) {
      min_sq[i] = std::min(min_sq[i], squared_distance(cloud[i], cloud[best]));
    }
  }
  return picks;
}

CropResult viewpoint_crop(const PointCloud& gt, const Viewpoint& vp, int n_missing, int n_keep) {
  validate_finite(gt, "viewpoint_crop");
  const int n = static_cast<int>(gt.size());
  if (n_missing < 1 || n_missing >= n) {
    throw InvalidArgument("viewpoint_crop: n_missing=" + std::to_string(n_missing) +
                          " must be in [1, N)");
  }
  if (n_keep < 1 || n_keep > n - n_missing) {
    throw InvalidArgument("viewpoint_crop: n_keep=" + std::to_string(n_keep) +
                          " exceeds remaining " + std::to_string(n - n_missing) + " points");
  }
  std::vector<std::pair<double, std::uint32_t>> order(n);
  for (int i = 0; i < n; ++i) {
    order[i] = {squared_distance(gt[i], vp.position), static_cast<std::uint32_t>(i)};
  }
  // Ascending (distance, index): the first N - n_missing survive, so a tie
  // at the boundary keeps the lower index.
  std::sort(order.begin(), order.end());

  IndexSet keep_ids, miss_ids;
  keep_ids.reserve(n - n_missing);
  miss_ids.reserve(n_missing);
  for (int i = 0; i < n - n_missing; ++i) keep_ids.push_back(order[i].second);
  for (int i = n - n_missing; i < n; ++i) miss_ids.push_back(order[i].second);
  std::sort(keep_ids.begin(), keep_ids.end());  // original index order
  std::sort(miss_ids.begin(), miss_ids.end());

  const PointCloud remaining = gather(gt, keep_ids);
  CropResult res;
  res.partial = gather(remaining, fps(remaining, n_keep));
  res.missing = gather(gt, miss_ids);
  return res;
}

std::array<Viewpoint, 8> fixed_test_viewpoints() {
  std::array<Viewpoint, 8> vps;
  int k = 0;
  for (double x : {-1.0, 1.0})
    for (double y : {-1.0, 1.0})
      for (double z : {-1.0, 1.0}) vps[k++] = Viewpoint{{x, y, z}, {0.0, 0.0, 0.0}};
  return vps;
}

PointCloud merge_resample(const PointCloud& coarse, const PointCloud& partial, int n0) {
  PointCloud merged;
  merged.reserve(coarse.size() + partial.size());
  merged.insert(merged.end(), coarse.begin(), coarse.end());
  merged.insert(merged.end(), partial.begin(), partial.end());
  if (merged.empty() || n0 < 1 || static_cast<std::size_t>(n0) > merged.size()) {
    throw InvalidArgument("merge_resample: need n0 in [1, " + std::to_string(merged.size()) + "]");
  }
  return gather(merged, fps(merged, n0));
}

std::vector<double> nearest_distance_field(const PointCloud& query, const PointCloud& anchor) {
  if (anchor.empty()) throw InvalidArgument("nearest_distance_field: empty anchor");
  std::vector<double> d(query.size());
  parallel_for(query.size(), [&](std::size_t qi) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& a : anchor) best = std::min(best, squared_distance(query[qi], a));
    d[qi] = std::sqrt(best);
  });
  return d;
}

NormalizeResult normalize(const PointCloud& cloud, double half_extent) {
  if (cloud.empty()) throw InvalidArgument("normalize: empty cloud");
  if (!(half_extent > 0.0)) throw InvalidArgument("normalize: half_extent must be positive");
  validate_finite(cloud, "normalize");
  Vec3 lo = cloud[0], hi = cloud[0];
  for (const auto& p : cloud) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
  }
  const Vec3 center = (lo + hi) * 0.5;
  const Vec3 ext = (hi - lo) * 0.5;
  const double max_half = std::max({ext.x, ext.y, ext.z});
  if (max_half <= 0.0) throw InvalidArgument("normalize: degenerate cloud (zero extent)");
  const double scale = half_extent / max_half;
  NormalizeResult res;
  res.cloud.reserve(cloud.size());
  for (const auto& p : cloud) res.cloud.push_back((p - center) * scale);
  res.transform = {center, scale};
  return res;
}

}  // namespace pcfill
