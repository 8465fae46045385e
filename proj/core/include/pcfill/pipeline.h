#pragma once

#include "pcfill/trace.h"

namespace pcfill {

// Whole pipeline: project the input into depth views, fuse, decode the
// coarse shape, and refine twice.
CompletionTrace complete_cloud(const PointCloud& p_in, const Profile& profile,
                               const WeightStore& w, const PipelineOptions& opts = {});

}  // namespace pcfill
