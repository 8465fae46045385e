#include "pcfill/svfnet.h"

#include <string>

#include "pcfill/errors.h"

namespace pcfill {

namespace {

FeatureMatrix row_matrix(const std::vector<double>& v) {
  FeatureMatrix m(1, static_cast<int>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) m(0, static_cast<int>(i)) = v[i];
  return m;
}

void add_row_broadcast(FeatureMatrix& m, const FeatureMatrix& row) {
  for (int r = 0; r < m.rows(); ++r) {
    double* dst = m.row(r);
    const double* src = row.row(0);
    for (int c = 0; c < m.cols(); ++c) dst[c] += src[c];
  }
}

// One sampled set-abstraction stage: fps centers, knn groups around them,
// a shared MLP on [relative xyz || neighbor features], max-pool per group.
// `features` may be empty (first stage runs on coordinates alone).
FeatureMatrix set_abstraction(const PointCloud& cloud, const FeatureMatrix& features,
                              const IndexSet& centers, int k,
                              const std::vector<std::string>& layer_names,
                              const WeightStore& w, PointCloud* centers_out) {
  const PointCloud center_pts = gather(cloud, centers);
  const auto groups = knn(center_pts, cloud, k);
  const int feat_dim = features.empty() ? 0 : features.cols();
  const int n = static_cast<int>(centers.size());

  FeatureMatrix edges(n * k, 3 + feat_dim);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < k; ++j) {
      const auto nb = groups[i][j];
      const Vec3 rel = cloud[nb] - center_pts[i];
      double* row = edges.row(i * k + j);
      row[0] = rel.x;
      row[1] = rel.y;
      row[2] = rel.z;
      for (int c = 0; c < feat_dim; ++c) row[3 + c] = features(static_cast<int>(nb), c);
    }
  }
  FeatureMatrix y = edges;
  for (const auto& name : layer_names) {
    y = linear(y, name, w);
    relu_inplace(y);
  }
  FeatureMatrix pooled(n, y.cols());
  for (int i = 0; i < n; ++i) {
    double* dst = pooled.row(i);
    for (int c = 0; c < y.cols(); ++c) dst[c] = y(i * k, c);
    for (int j = 1; j < k; ++j) {
      const double* src = y.row(i * k + j);
      for (int c = 0; c < y.cols(); ++c) dst[c] = std::max(dst[c], src[c]);
    }
  }
  if (centers_out != nullptr) *centers_out = center_pts;
  return pooled;
}

}  // namespace

GlobalDescriptor encode_points(const PointCloud& p_in, const Profile& profile,
                               const WeightStore& w) {
  validate_finite(p_in, "encode_points");
  if (static_cast<int>(p_in.size()) < profile.sa_n[0]) {
    throw InvalidArgument("encode_points: need at least " + std::to_string(profile.sa_n[0]) +
                          " points, got " + std::to_string(p_in.size()));
  }
  PointCloud c1;
  const FeatureMatrix f1 =
      set_abstraction(p_in, FeatureMatrix(), fps(p_in, profile.sa_n[0]), profile.sa_k[0],
                      {"svf.encp.sa1.l0", "svf.encp.sa1.l1"}, w, &c1);
  PointCloud c2;
  const FeatureMatrix f2 = set_abstraction(c1, f1, fps(c1, profile.sa_n[1]), profile.sa_k[1],
                                           {"svf.encp.sa2.l0"}, w, &c2);
  // Global stage: [per-point feature || pooled feature], project, max-pool.
  const std::vector<double> pooled = column_max(f2);
  FeatureMatrix cat(f2.rows(), 2 * f2.cols());
  for (int r = 0; r < f2.rows(); ++r) {
    double* dst = cat.row(r);
    for (int c = 0; c < f2.cols(); ++c) dst[c] = f2(r, c);
    for (int c = 0; c < f2.cols(); ++c) dst[f2.cols() + c] = pooled[c];
  }
  FeatureMatrix g = linear(cat, "svf.encp.sa3.l0", w);
  relu_inplace(g);
  return column_max(g);
}

std::vector<FeatureMatrix> encode_views(const std::vector<DepthMap>& maps, const Profile& profile,
                                        const WeightStore& w) {
  return conv2d_encoder(maps, "svf.enc2d", w, profile.channels);
}

FeatureMatrix fuse_stage1(const std::vector<FeatureMatrix>& view_tokens,
                          const GlobalDescriptor& f_p, const Profile& profile,
                          const WeightStore& w) {
  if (view_tokens.empty()) throw InvalidArgument("fuse_stage1: no views");
  const FeatureMatrix cond = linear(row_matrix(f_p), "svf.fuse1.cond", w);
  FeatureMatrix pooled(static_cast<int>(view_tokens.size()), profile.channels);
  for (std::size_t vi = 0; vi < view_tokens.size(); ++vi) {
    FeatureMatrix tokens = view_tokens[vi];
    if (tokens.cols() != profile.channels) {
      throw InvalidArgument("fuse_stage1: token width " + std::to_string(tokens.cols()) +
                            " does not match channels " + std::to_string(profile.channels));
    }
    add_row_broadcast(tokens, cond);  // point descriptor conditions Q, K and V
    const FeatureMatrix q = linear_nobias(tokens, "svf.fuse1.wq", w);
    const FeatureMatrix k = linear_nobias(tokens, "svf.fuse1.wk", w);
    const FeatureMatrix v = linear_nobias(tokens, "svf.fuse1.wv", w);
    FeatureMatrix logits(q.rows(), k.rows());
    const double s = 1.0 / std::sqrt(static_cast<double>(q.cols()));
    for (int i = 0; i < q.rows(); ++i) {
      for (int j = 0; j < k.rows(); ++j) {
        double acc = 0.0;
        for (int c = 0; c < q.cols(); ++c) acc += q(i, c) * k(j, c);
        logits(i, j) = acc * s;
      }
    }
    const FeatureMatrix attn = softmax_rows(logits);
    FeatureMatrix refined(v.rows(), v.cols());
    for (int i = 0; i < attn.rows(); ++i) {
      double* dst = refined.row(i);
      for (int j = 0; j < attn.cols(); ++j) {
        const double a = attn(i, j);
        const double* vr = v.row(j);
        for (int c = 0; c < v.cols(); ++c) dst[c] += a * vr[c];
      }
    }
    const auto vg = column_max(refined);
    for (int c = 0; c < profile.channels; ++c) pooled(static_cast<int>(vi), c) = vg[c];
  }
  return pooled;
}

GlobalDescriptor fuse_stage2(const FeatureMatrix& f_vg, const GlobalDescriptor& f_p,
                             const std::vector<Viewpoint>& vps, const Profile& profile,
                             const WeightStore& w) {
  if (static_cast<int>(vps.size()) != f_vg.rows()) {
    throw InvalidArgument("fuse_stage2: " + std::to_string(vps.size()) + " viewpoints for " +
                          std::to_string(f_vg.rows()) + " view features");
  }
  const FeatureMatrix cond = linear(row_matrix(f_p), "svf.fuse2.cond", w);
  FeatureMatrix base = f_vg;
  add_row_broadcast(base, cond);

  FeatureMatrix vp_mat(static_cast<int>(vps.size()), 3);
  for (std::size_t i = 0; i < vps.size(); ++i) {
    vp_mat(static_cast<int>(i), 0) = vps[i].position.x;
    vp_mat(static_cast<int>(i), 1) = vps[i].position.y;
    vp_mat(static_cast<int>(i), 2) = vps[i].position.z;
  }
  const FeatureMatrix vp_embed = linear(vp_mat, "svf.fuse2.vp", w);

  // Viewpoint embeddings act as positional signals on queries and keys
  // only; values carry the conditioned view features.
  FeatureMatrix qk_in = base;
  for (int r = 0; r < qk_in.rows(); ++r) {
    for (int c = 0; c < qk_in.cols(); ++c) qk_in(r, c) += vp_embed(r, c);
  }
  const FeatureMatrix q = linear_nobias(qk_in, "svf.fuse2.wq", w);
  const FeatureMatrix k = linear_nobias(qk_in, "svf.fuse2.wk", w);
  const FeatureMatrix v = linear_nobias(base, "svf.fuse2.wv", w);

  FeatureMatrix logits(q.rows(), k.rows());
  const double s = 1.0 / std::sqrt(static_cast<double>(q.cols()));
  for (int i = 0; i < q.rows(); ++i) {
    for (int j = 0; j < k.rows(); ++j) {
      double acc = 0.0;
      for (int c = 0; c < q.cols(); ++c) acc += q(i, c) * k(j, c);
      logits(i, j) = acc * s;
    }
  }
  const FeatureMatrix attn = softmax_rows(logits);
  FeatureMatrix fused(v.rows(), v.cols());
  for (int i = 0; i < attn.rows(); ++i) {
    double* dst = fused.row(i);
    for (int j = 0; j < attn.cols(); ++j) {
      const double a = attn(i, j);
      const double* vr = v.row(j);
      for (int c = 0; c < v.cols(); ++c) dst[c] += a * vr[c];
    }
  }
  return column_max(fused);
}

PointCloud decode_coarse(const GlobalDescriptor& f_g, int n_c, const Profile& profile,
                         const WeightStore& w) {
  if (n_c < 1) throw InvalidArgument("decode_coarse: n_c must be positive");
  const FeatureMatrix seeds = conv_transpose1d(f_g, n_c, "svf.dec.expand", w);
  FeatureMatrix x = linear(seeds, "svf.dec.in", w);
  x = self_attention(x, "svf.dec.attn", w, /*scaled=*/true);
  const FeatureMatrix coords = linear(x, "svf.dec.out", w);
  PointCloud out(n_c);
  for (int i = 0; i < n_c; ++i) out[i] = {coords(i, 0), coords(i, 1), coords(i, 2)};
  return out;
}

SvfResult svfnet_forward(const PointCloud& p_in, const Profile& profile, const WeightStore& w,
                         const PipelineOptions& opts) {
  SvfResult res;
  res.f_p = encode_points(p_in, profile, w);

  if (opts.no_projection) {
    // Depth branch ablated: the shape descriptor comes from the point
    // descriptor alone, through the stage-2 conditioning map.
    const FeatureMatrix fg = linear(row_matrix(res.f_p), "svf.fuse2.cond", w);
    res.f_g.assign(fg.row(0), fg.row(0) + fg.cols());
  } else {
    const auto vps = projection_viewpoints(profile.n_views, profile.camera_distance);
    ProjectionParams params;
    params.resolution = profile.resolution;
    params.camera_distance = profile.camera_distance;
    params.densify_radius = profile.densify_radius;
    params.fov_degrees = profile.fov_degrees;
    for (const auto& vp : vps) res.depth_maps.push_back(project_depth(p_in, vp, params));
    const auto tokens = encode_views(res.depth_maps, profile, w);
    const FeatureMatrix f_vg = fuse_stage1(tokens, res.f_p, profile, w);
    res.f_g = fuse_stage2(f_vg, res.f_p, vps, profile, w);
  }

  res.p_c = decode_coarse(res.f_g, profile.n0, profile, w);
  res.p_0 = merge_resample(res.p_c, p_in, profile.n0);
  return res;
}

}  // namespace pcfill
