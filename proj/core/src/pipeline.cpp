#include "pcfill/pipeline.h"

namespace pcfill {

CompletionTrace complete_cloud(const PointCloud& p_in, const Profile& profile,
                               const WeightStore& w, const PipelineOptions& opts) {
  SvfResult svf = svfnet_forward(p_in, profile, w, opts);
  RefineResult refined = refine_stack(svf.p_0, p_in, svf.f_g, profile, w, opts);

  CompletionTrace trace;
  trace.p_c = std::move(svf.p_c);
  trace.p_0 = std::move(svf.p_0);
  trace.p_1 = std::move(refined.p_1);
  trace.p_2 = std::move(refined.p_2);
  trace.gates = std::move(refined.gates);
  trace.attentions = std::move(refined.attentions);
  trace.depth_maps = std::move(svf.depth_maps);
  return trace;
}

}  // namespace pcfill
