#pragma once

#include <vector>

#include "pcfill/config.h"
#include "pcfill/geometry.h"
#include "pcfill/neural.h"
#include "pcfill/projection.h"

namespace pcfill {

using GlobalDescriptor = std::vector<double>;

struct ViewFeatureSet {
  std::vector<FeatureMatrix> patch_tokens;  // per view, P x C
  FeatureMatrix pooled;                     // N_V x C view-wise features
  std::vector<Viewpoint> viewpoints;
};

// Global point descriptor: two sampled set-abstraction stages (fps
// centers, knn groups, per-group MLP on [relative xyz || features],
// max-pool) and a global stage that concatenates each center feature with
// the pooled one before the final projection and max-pool.
GlobalDescriptor encode_points(const PointCloud& p_in, const Profile& profile, const WeightStore& w);

// Per-view patch tokens from the shared 2D encoder; all maps must share
// one resolution divisible by 32.
std::vector<FeatureMatrix> encode_views(const std::vector<DepthMap>& maps, const Profile& profile,
                                        const WeightStore& w);

// Within-view fusion: the point descriptor conditions the Q/K/V inputs of
// an attention pass over one view's patch tokens; max-pool over patches
// yields one row per view.
FeatureMatrix fuse_stage1(const std::vector<FeatureMatrix>& view_tokens, const GlobalDescriptor& f_p,
                          const Profile& profile, const WeightStore& w);

// Across-view fusion: viewpoint positions enter Q and K as positional
// signals, the point descriptor conditions all tokens, and max-pool over
// views yields the shape descriptor.
GlobalDescriptor fuse_stage2(const FeatureMatrix& f_vg, const GlobalDescriptor& f_p,
                             const std::vector<Viewpoint>& vps, const Profile& profile,
                             const WeightStore& w);

// Expands the shape descriptor into n_c tokens, runs one self-attention
// block, and regresses coordinates.
PointCloud decode_coarse(const GlobalDescriptor& f_g, int n_c, const Profile& profile,
                         const WeightStore& w);

struct SvfResult {
  PointCloud p_c;                   // decoded coarse shape
  PointCloud p_0;                   // merge_resample(p_c, p_in, n0)
  GlobalDescriptor f_g;
  GlobalDescriptor f_p;
  std::vector<DepthMap> depth_maps;
};

SvfResult svfnet_forward(const PointCloud& p_in, const Profile& profile, const WeightStore& w,
                         const PipelineOptions& opts = {});

}  // namespace pcfill
