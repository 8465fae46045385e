#pragma once

#include <string>
#include <vector>

#include "pcfill/projection.h"
#include "pcfill/tensor.h"
#include "pcfill/weights.h"

namespace pcfill {

// Deterministic forward-only neural kernels. Naming convention for
// parameters: a layer `name` reads `name.weight` (in x out) and
// `name.bias` (out); attention projections are bias-free and live under
// `prefix.wq/.wk/.wv`, with the feed-forward under `prefix.ff.l0/.l1`.

// y = x * W + b, row-wise.
FeatureMatrix linear(const FeatureMatrix& x, const std::string& name, const WeightStore& w);
FeatureMatrix linear_nobias(const FeatureMatrix& x, const std::string& name, const WeightStore& w);

// Stacked linear layers `prefix.l0 .. l<layers-1>` with ReLU between
// layers and none after the last.
FeatureMatrix mlp(const FeatureMatrix& x, const std::string& prefix, int layers, const WeightStore& w);

void relu_inplace(FeatureMatrix& x);

// Row-wise exp-normalization with max subtraction.
FeatureMatrix softmax_rows(const FeatureMatrix& x);

// Transformer-convention sinusoidal embedding of a scalar:
// channel 2k = sin(t / 10000^(2k/C)), channel 2k+1 = cos of the same.
// C must be even.
std::vector<double> sinusoidal_embed(double t, int channels);
FeatureMatrix sinusoidal_embed_rows(const std::vector<double>& ts, int channels);

// Single-head attention block: out = A*V + x with A = softmax(Q K^T * s),
// s = 1/sqrt(C) when scaled, followed by a residual feed-forward.
FeatureMatrix self_attention(const FeatureMatrix& x, const std::string& prefix,
                             const WeightStore& w, bool scaled);

struct CrossAttentionResult {
  FeatureMatrix out;        // N_q x C
  FeatureMatrix attention;  // N_q x N_kv, filled when want_map
};

// As self_attention but queries from q_src and keys/values from kv_src;
// the residual adds q_src. Unscaled unless requested.
CrossAttentionResult cross_attention(const FeatureMatrix& q_src, const FeatureMatrix& kv_src,
                                     const std::string& prefix, const WeightStore& w,
                                     bool want_map = false, bool scaled = false);

// Incompleteness-aware self-attention: logits (f_i Wq + h_i)(f_j Wk + h_j)^T,
// values f_j Wv, no scaling by default. h must match f's shape. With h = 0
// this is exactly the unscaled self_attention.
FeatureMatrix ia_self_attention(const FeatureMatrix& f, const FeatureMatrix& h,
                                const std::string& prefix, const WeightStore& w,
                                bool scaled = false);

// Five stride-2 3x3 convolution stages (1 -> 16 -> 32 -> 64 -> 128 ->
// out_channels), ReLU after each, for inputs whose side is divisible by
// 32. Returns one (H/32 * W/32) x out_channels token matrix per view,
// tokens in row-major grid order.
std::vector<FeatureMatrix> conv2d_encoder(const std::vector<DepthMap>& maps,
                                          const std::string& prefix, const WeightStore& w,
                                          int out_channels);

// Transposed 1D convolution with kernel size = stride = n_out applied to a
// single token: expands one C-vector into n_out token features.
FeatureMatrix conv_transpose1d(const std::vector<double>& g, int n_out,
                               const std::string& name, const WeightStore& w);

}  // namespace pcfill
