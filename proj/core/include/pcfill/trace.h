#pragma once

#include <array>
#include <filesystem>

#include "pcfill/projection.h"
#include "pcfill/sdg.h"

namespace pcfill {

// Full coarse-to-fine record of one completion run.
struct CompletionTrace {
  PointCloud p_c;
  PointCloud p_0;
  PointCloud p_1;
  PointCloud p_2;
  std::array<PathGate, 2> gates;
  std::array<FeatureMatrix, 2> attentions;
  std::vector<DepthMap> depth_maps;
};

// Directory layout: p_c.pcb p_0.pcb p_1.pcb p_2.pcb, alpha_<l>.f32 (raw
// float32 LE), attn_<l>.f32 plus a one-line attn_<l>.meta with "rows cols".
void write_trace(const std::filesystem::path& dir, const CompletionTrace& trace);

}  // namespace pcfill
