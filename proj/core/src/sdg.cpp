#include "pcfill/sdg.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "pcfill/errors.h"
#include "pcfill/parallel.h"

namespace pcfill {

namespace {

std::string step_prefix(int iteration) { return "sdg.i" + std::to_string(iteration + 1); }

// Exact k nearest rows by Euclidean distance in feature space, ties by
// lower index; self included.
std::vector<IndexSet> knn_rows(const FeatureMatrix& rows, int k) {
  const int n = rows.rows();
  if (k < 1 || k > n) throw InvalidArgument("knn_rows: k out of range");
  std::vector<IndexSet> out(n);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t i) {
    std::vector<std::pair<double, std::uint32_t>> cand(n);
    const double* ri = rows.row(static_cast<int>(i));
    for (int j = 0; j < n; ++j) {
      const double* rj = rows.row(j);
      double acc = 0.0;
      for (int c = 0; c < rows.cols(); ++c) {
        const double d = ri[c] - rj[c];
        acc += d * d;
      }
      cand[j] = {acc, static_cast<std::uint32_t>(j)};
    }
    std::partial_sort(cand.begin(), cand.begin() + k, cand.end());
    IndexSet ids(k);
    for (int j = 0; j < k; ++j) ids[j] = cand[j].second;
    out[i] = std::move(ids);
  });
  return out;
}

// Edge convolution: per point, max over neighbors of MLP([f_i || f_j - f_i]).
FeatureMatrix edge_conv(const FeatureMatrix& features, const std::vector<IndexSet>& neighbors,
                        const std::string& layer, const WeightStore& w) {
  const int n = features.rows();
  const int fd = features.cols();
  const int k = static_cast<int>(neighbors[0].size());
  FeatureMatrix edges(n * k, 2 * fd);
  for (int i = 0; i < n; ++i) {
    const double* fi = features.row(i);
    for (int j = 0; j < k; ++j) {
      const double* fj = features.row(static_cast<int>(neighbors[i][j]));
      double* row = edges.row(i * k + j);
      for (int c = 0; c < fd; ++c) row[c] = fi[c];
      for (int c = 0; c < fd; ++c) row[fd + c] = fj[c] - fi[c];
    }
  }
  FeatureMatrix y = linear(edges, layer, w);
  relu_inplace(y);
  FeatureMatrix pooled(n, y.cols());
  for (int i = 0; i < n; ++i) {
    double* dst = pooled.row(i);
    for (int c = 0; c < y.cols(); ++c) dst[c] = y(i * k, c);
    for (int j = 1; j < k; ++j) {
      const double* src = y.row(i * k + j);
      for (int c = 0; c < y.cols(); ++c) dst[c] = std::max(dst[c], src[c]);
    }
  }
  return pooled;
}

double sigmoid_clamped(double logit) {
  // Clamped so alpha stays strictly inside (0, 1) in double precision.
  const double l = std::clamp(logit, -36.0, 36.0);
  return 1.0 / (1.0 + std::exp(-l));
}

}  // namespace

IncompletenessField incompleteness_embed(const PointCloud& p, const PointCloud& p_in,
                                         double gamma, int channels) {
  if (!(gamma > 0.0)) throw InvalidArgument("incompleteness_embed: gamma must be positive");
  IncompletenessField field;
  field.gamma = gamma;
  field.d = nearest_distance_field(p, p_in);
  std::vector<double> ts(field.d.size());
  for (std::size_t i = 0; i < ts.size(); ++i) ts[i] = field.d[i] / gamma;
  field.h = sinusoidal_embed_rows(ts, channels);
  return field;
}

AnalysisResult structure_analysis(const PointCloud& p_prev, const GlobalDescriptor& f_g,
                                  const IncompletenessField& field, int iteration, int depth,
                                  const WeightStore& w) {
  const int n = static_cast<int>(p_prev.size());
  if (field.h.rows() != n) {
    throw InvalidArgument("structure_analysis: field has " + std::to_string(field.h.rows()) +
                          " rows for " + std::to_string(n) + " points");
  }
  const std::string pre = step_prefix(iteration);
  FeatureMatrix cat(n, 3 + static_cast<int>(f_g.size()));
  for (int i = 0; i < n; ++i) {
    double* row = cat.row(i);
    row[0] = p_prev[i].x;
    row[1] = p_prev[i].y;
    row[2] = p_prev[i].z;
    for (std::size_t c = 0; c < f_g.size(); ++c) row[3 + c] = f_g[c];
  }
  AnalysisResult res;
  const FeatureMatrix f_c = linear(cat, pre + ".embed", w);
  res.f_q = ia_self_attention(f_c, field.h, pre + ".ia", w);
  res.f_q_prime = res.f_q;
  for (int b = 0; b < depth; ++b) {
    res.f_q_prime =
        self_attention(res.f_q_prime, pre + ".qdec.b" + std::to_string(b), w, /*scaled=*/true);
  }
  return res;
}

FeatureMatrix encode_partial(const PointCloud& p_in, const Profile& profile,
                             const WeightStore& w) {
  if (static_cast<int>(p_in.size()) < profile.ec_fps) {
    throw InvalidArgument("encode_partial: need at least " + std::to_string(profile.ec_fps) +
                          " points, got " + std::to_string(p_in.size()));
  }
  // Layer 1 groups in coordinate space.
  FeatureMatrix coords(static_cast<int>(p_in.size()), 3);
  for (std::size_t i = 0; i < p_in.size(); ++i) {
    coords(static_cast<int>(i), 0) = p_in[i].x;
    coords(static_cast<int>(i), 1) = p_in[i].y;
    coords(static_cast<int>(i), 2) = p_in[i].z;
  }
  const FeatureMatrix f1 = edge_conv(coords, knn(p_in, p_in, profile.ec_k[0]), "sdg.ec1.l0", w);

  const IndexSet keep = fps(p_in, profile.ec_fps);
  FeatureMatrix f1_ds(profile.ec_fps, f1.cols());
  for (int i = 0; i < profile.ec_fps; ++i) {
    const double* src = f1.row(static_cast<int>(keep[i]));
    double* dst = f1_ds.row(i);
    for (int c = 0; c < f1.cols(); ++c) dst[c] = src[c];
  }
  // Layer 2 groups in feature space (dynamic graph).
  return edge_conv(f1_ds, knn_rows(f1_ds, profile.ec_k[1]), "sdg.ec2.l0", w);
}

AlignmentResult similarity_alignment(const FeatureMatrix& f_q, const FeatureMatrix& f_in,
                                     int iteration, int depth, const WeightStore& w) {
  const std::string pre = step_prefix(iteration);
  auto cross = cross_attention(f_q, f_in, pre + ".cross", w, /*want_map=*/true);
  AlignmentResult res;
  res.attention = std::move(cross.attention);
  res.f_h_prime = std::move(cross.out);
  for (int b = 0; b < depth; ++b) {
    res.f_h_prime =
        self_attention(res.f_h_prime, pre + ".hdec.b" + std::to_string(b), w, /*scaled=*/true);
  }
  return res;
}

// Blend computed per point in double; with equal inputs the result equals
// them bit-for-bit regardless of alpha.
static FeatureMatrix blend_paths(const FeatureMatrix& f_q_prime, const FeatureMatrix& f_h_prime,
                                 const std::vector<double>& alpha) {
  FeatureMatrix out(f_q_prime.rows(), f_q_prime.cols());
  for (int i = 0; i < out.rows(); ++i) {
    const double a = alpha[i];
    const double* qa = f_q_prime.row(i);
    const double* hb = f_h_prime.row(i);
    double* dst = out.row(i);
    for (int c = 0; c < out.cols(); ++c) {
      dst[c] = qa[c] == hb[c] ? qa[c] : a * qa[c] + (1.0 - a) * hb[c];
    }
  }
  return out;
}

PathSelectResult path_select(const FeatureMatrix& f_q_prime, const FeatureMatrix& f_h_prime,
                             const FeatureMatrix& f_q, const FeatureMatrix* f_prev,
                             int iteration, const WeightStore& w) {
  if (f_q_prime.rows() != f_h_prime.rows() || f_q_prime.cols() != f_h_prime.cols() ||
      f_q_prime.rows() != f_q.rows()) {
    throw InvalidArgument("path_select: path feature shapes disagree");
  }
  if (f_prev != nullptr && f_prev->rows() != f_q_prime.rows()) {
    throw InvalidArgument("path_select: previous-step features have " +
                          std::to_string(f_prev->rows()) + " rows, expected " +
                          std::to_string(f_q_prime.rows()));
  }
  const std::string pre = step_prefix(iteration);
  const int n = f_q_prime.rows();
  const int d = f_q_prime.cols();
  const int prev_d = f_prev != nullptr ? f_prev->cols() : 0;
  const std::vector<double> maxq = column_max(f_q);

  FeatureMatrix gate_in(n, d + prev_d + static_cast<int>(maxq.size()));
  for (int i = 0; i < n; ++i) {
    double* row = gate_in.row(i);
    for (int c = 0; c < d; ++c) row[c] = f_q_prime(i, c) + f_h_prime(i, c);
    for (int c = 0; c < prev_d; ++c) row[d + c] = (*f_prev)(i, c);
    for (std::size_t c = 0; c < maxq.size(); ++c) row[d + prev_d + c] = maxq[c];
  }
  const FeatureMatrix logits = mlp(gate_in, pre + ".gate", 2, w);

  PathSelectResult res;
  res.gate.alpha.resize(n);
  for (int i = 0; i < n; ++i) res.gate.alpha[i] = sigmoid_clamped(logits(i, 0));
  res.f_l_prime = blend_paths(f_q_prime, f_h_prime, res.gate.alpha);
  return res;
}

OffsetResult offset_regress(const FeatureMatrix& f_l_prime, int rate, const PointCloud& p_prev,
                            int iteration, const WeightStore& w) {
  if (rate < 1) throw InvalidArgument("offset_regress: rate must be >= 1");
  if (f_l_prime.rows() != static_cast<int>(p_prev.size())) {
    throw InvalidArgument("offset_regress: feature rows do not match point count");
  }
  const std::string pre = step_prefix(iteration);
  const FeatureMatrix up = linear(f_l_prime, pre + ".up", w);
  if (up.cols() % rate != 0) {
    throw InvalidArgument("offset_regress: projection width not divisible by rate");
  }
  const int feat = up.cols() / rate;
  const int n = f_l_prime.rows();

  OffsetResult res;
  res.f_l = FeatureMatrix(n * rate, feat);
  for (int i = 0; i < n; ++i) {
    const double* src = up.row(i);
    for (int r = 0; r < rate; ++r) {
      double* dst = res.f_l.row(i * rate + r);
      for (int c = 0; c < feat; ++c) dst[c] = src[r * feat + c];
    }
  }
  const FeatureMatrix offsets = mlp(res.f_l, "sdg.offset", 2, w);
  res.p_l.resize(static_cast<std::size_t>(n) * rate);
  for (int i = 0; i < n; ++i) {
    for (int r = 0; r < rate; ++r) {
      const int row = i * rate + r;
      res.p_l[row] = p_prev[i] + Vec3{offsets(row, 0), offsets(row, 1), offsets(row, 2)};
    }
  }
  return res;
}

SdgResult sdg_forward(const SdgState& state, const PointCloud& p_in, const GlobalDescriptor& f_g,
                      const Profile& profile, const WeightStore& w, const PipelineOptions& opts) {
  if (state.iteration < 0 || state.iteration > 1) {
    throw InvalidArgument("sdg_forward: iteration must be 0 or 1");
  }
  if (!state.f_prev.empty() &&
      state.f_prev.rows() != static_cast<int>(state.p_prev.size())) {
    throw InvalidArgument("sdg_forward: previous features do not match previous points");
  }
  const int dim = profile.sdg_dims[state.iteration];

  IncompletenessField field = incompleteness_embed(state.p_prev, p_in, profile.gamma, dim);
  if (opts.no_incompleteness) {
    field.h = FeatureMatrix(static_cast<int>(state.p_prev.size()), dim);
  }

  const AnalysisResult analysis =
      structure_analysis(state.p_prev, f_g, field, state.iteration, profile.decoder_depth, w);

  SdgResult res;
  if (opts.no_alignment) {
    OffsetResult off =
        offset_regress(analysis.f_q_prime, state.rate, state.p_prev, state.iteration, w);
    res.p_l = std::move(off.p_l);
    res.f_l = std::move(off.f_l);
    return res;
  }

  const FeatureMatrix f_in = encode_partial(p_in, profile, w);
  AlignmentResult alignment =
      similarity_alignment(analysis.f_q, f_in, state.iteration, profile.decoder_depth, w);
  res.attention = std::move(alignment.attention);

  FeatureMatrix f_l_prime;
  if (opts.no_analysis) {
    f_l_prime = alignment.f_h_prime;
  } else if (opts.fixed_alpha.has_value()) {
    res.gate.alpha.assign(state.p_prev.size(), *opts.fixed_alpha);
    f_l_prime = blend_paths(analysis.f_q_prime, alignment.f_h_prime, res.gate.alpha);
  } else {
    auto sel = path_select(analysis.f_q_prime, alignment.f_h_prime, analysis.f_q,
                           state.f_prev.empty() ? nullptr : &state.f_prev, state.iteration, w);
    res.gate = std::move(sel.gate);
    f_l_prime = std::move(sel.f_l_prime);
  }

  OffsetResult off = offset_regress(f_l_prime, state.rate, state.p_prev, state.iteration, w);
  res.p_l = std::move(off.p_l);
  res.f_l = std::move(off.f_l);
  return res;
}

RefineResult refine_stack(const PointCloud& p_0, const PointCloud& p_in,
                          const GlobalDescriptor& f_g, const Profile& profile,
                          const WeightStore& w, const PipelineOptions& opts) {
  SdgState first{p_0, FeatureMatrix(), profile.rates[0], 0};
  SdgResult r1 = sdg_forward(first, p_in, f_g, profile, w, opts);

  SdgState second{r1.p_l, r1.f_l, profile.rates[1], 1};
  SdgResult r2 = sdg_forward(second, p_in, f_g, profile, w, opts);

  RefineResult res;
  res.p_1 = std::move(r1.p_l);
  res.p_2 = std::move(r2.p_l);
  res.gates = {std::move(r1.gate), std::move(r2.gate)};
  res.attentions = {std::move(r1.attention), std::move(r2.attention)};
  return res;
}

}  // namespace pcfill
