#pragma once

#include <array>
#include <vector>

#include "pcfill/config.h"
#include "pcfill/geometry.h"
#include "pcfill/svfnet.h"

namespace pcfill {

// Per-point incompleteness: d is the distance to the nearest partial-input
// point, h its sinusoidal embedding of d/gamma.
struct IncompletenessField {
  std::vector<double> d;
  FeatureMatrix h;
  double gamma = 0.2;
};

// Per-point blend gate, strictly inside (0, 1).
struct PathGate {
  std::vector<double> alpha;
};

struct SdgState {
  PointCloud p_prev;
  FeatureMatrix f_prev;  // offset features from the previous step; empty for the first
  int rate = 1;
  int iteration = 0;     // 0 or 1, selects per-step tensor set and width
};

IncompletenessField incompleteness_embed(const PointCloud& p, const PointCloud& p_in,
                                         double gamma, int channels);

struct AnalysisResult {
  FeatureMatrix f_q;        // incompleteness-aware attention output
  FeatureMatrix f_q_prime;  // after the decoder blocks
};

// Structure analysis path: embed [xyz || shape descriptor], run the
// incompleteness-aware attention, then `depth` self-attention blocks.
AnalysisResult structure_analysis(const PointCloud& p_prev, const GlobalDescriptor& f_g,
                                  const IncompletenessField& field, int iteration, int depth,
                                  const WeightStore& w);

// Local features of the partial input: edge convolution over coordinate
// neighbors, fps downsample, edge convolution over feature-space
// neighbors.
FeatureMatrix encode_partial(const PointCloud& p_in, const Profile& profile, const WeightStore& w);

struct AlignmentResult {
  FeatureMatrix f_h_prime;
  FeatureMatrix attention;  // N_prev x N_in cross-attention map
};

// Similarity alignment path: cross-attention from the analysis features
// onto the partial-input features, then the same decoder architecture.
AlignmentResult similarity_alignment(const FeatureMatrix& f_q, const FeatureMatrix& f_in,
                                     int iteration, int depth, const WeightStore& w);

struct PathSelectResult {
  FeatureMatrix f_l_prime;
  PathGate gate;
};

// Per-point gate alpha = sigmoid(MLP([(F_Q' + F_H') || F_prev || max(F_Q)]))
// blending the two paths; F_prev is omitted when absent (first step).
PathSelectResult path_select(const FeatureMatrix& f_q_prime, const FeatureMatrix& f_h_prime,
                             const FeatureMatrix& f_q, const FeatureMatrix* f_prev,
                             int iteration, const WeightStore& w);

struct OffsetResult {
  PointCloud p_l;      // rate * N points
  FeatureMatrix f_l;   // (rate * N) x offset_feat
};

// Projects the blended feature to rate*offset_feat channels, reshapes
// row-major to per-child features, regresses offsets through the
// [offset_feat, 64, 3] MLP and adds them to the r-times repeated parents.
OffsetResult offset_regress(const FeatureMatrix& f_l_prime, int rate, const PointCloud& p_prev,
                            int iteration, const WeightStore& w);

struct SdgResult {
  PointCloud p_l;
  FeatureMatrix f_l;
  PathGate gate;
  FeatureMatrix attention;
};

SdgResult sdg_forward(const SdgState& state, const PointCloud& p_in, const GlobalDescriptor& f_g,
                      const Profile& profile, const WeightStore& w,
                      const PipelineOptions& opts = {});

struct RefineResult {
  PointCloud p_1;
  PointCloud p_2;
  std::array<PathGate, 2> gates;
  std::array<FeatureMatrix, 2> attentions;
};

// Two refinement steps; step widths come from profile.sdg_dims, rates from
// profile.rates, and the offset features of step 1 feed step 2's gate.
RefineResult refine_stack(const PointCloud& p_0, const PointCloud& p_in,
                          const GlobalDescriptor& f_g, const Profile& profile,
                          const WeightStore& w, const PipelineOptions& opts = {});

}  // namespace pcfill
