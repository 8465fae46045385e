#include "pcfill/neural.h"

#include <cmath>
#include <string>

#include "pcfill/errors.h"
#include "pcfill/parallel.h"

namespace pcfill {

namespace {

std::string shape_str(int r, int c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

// x (N x in) times a stored float32 weight (in x out), accumulated in
// double with a fixed i-k-j order.
FeatureMatrix matmul_weight(const FeatureMatrix& x, const WeightStore::Tensor& wt,
                            const std::string& name) {
  if (wt.shape.size() != 2) {
    throw InvalidArgument("linear: tensor \"" + name + "\" is not 2-D");
  }
  const int in = static_cast<int>(wt.shape[0]);
  const int out = static_cast<int>(wt.shape[1]);
  if (x.cols() != in) {
    throw InvalidArgument("linear: input " + shape_str(x.rows(), x.cols()) +
                          " does not match \"" + name + "\" of shape " + shape_str(in, out));
  }
  FeatureMatrix y(x.rows(), out);
  parallel_for(static_cast<std::size_t>(x.rows()), [&](std::size_t i) {
    const double* xr = x.row(static_cast<int>(i));
    double* yr = y.row(static_cast<int>(i));
    for (int k = 0; k < in; ++k) {
      const double a = xr[k];
      if (a == 0.0) continue;
      const float* wr = wt.data.data() + static_cast<std::size_t>(k) * out;
      for (int j = 0; j < out; ++j) yr[j] += a * wr[j];
    }
  });
  return y;
}

// A (N x K) * B (K x M).
FeatureMatrix matmul(const FeatureMatrix& a, const FeatureMatrix& b) {
  FeatureMatrix y(a.rows(), b.cols());
  parallel_for(static_cast<std::size_t>(a.rows()), [&](std::size_t i) {
    const double* ar = a.row(static_cast<int>(i));
    double* yr = y.row(static_cast<int>(i));
    for (int k = 0; k < a.cols(); ++k) {
      const double v = ar[k];
      if (v == 0.0) continue;
      const double* br = b.row(k);
      for (int j = 0; j < b.cols(); ++j) yr[j] += v * br[j];
    }
  });
  return y;
}

// A (N x C) * B^T (M x C) -> N x M.
FeatureMatrix matmul_nt(const FeatureMatrix& a, const FeatureMatrix& b) {
  FeatureMatrix y(a.rows(), b.rows());
  parallel_for(static_cast<std::size_t>(a.rows()), [&](std::size_t i) {
    const double* ar = a.row(static_cast<int>(i));
    double* yr = y.row(static_cast<int>(i));
    for (int j = 0; j < b.rows(); ++j) {
      const double* br = b.row(j);
      double acc = 0.0;
      for (int k = 0; k < a.cols(); ++k) acc += ar[k] * br[k];
      yr[j] = acc;
    }
  });
  return y;
}

void add_inplace(FeatureMatrix& a, const FeatureMatrix& b) {
  for (std::size_t i = 0; i < a.data().size(); ++i) a.data()[i] += b.data()[i];
}

void scale_inplace(FeatureMatrix& a, double s) {
  for (auto& v : a.data()) v *= s;
}

// Shared attention tail: softmax, value mixing, residual, feed-forward.
FeatureMatrix attention_tail(const FeatureMatrix& q, const FeatureMatrix& k,
                             const FeatureMatrix& v, const FeatureMatrix& residual,
                             const std::string& prefix, const WeightStore& w, bool scaled,
                             FeatureMatrix* map_out) {
  FeatureMatrix logits = matmul_nt(q, k);
  if (scaled) scale_inplace(logits, 1.0 / std::sqrt(static_cast<double>(q.cols())));
  const FeatureMatrix attn = softmax_rows(logits);
  if (map_out != nullptr) *map_out = attn;
  FeatureMatrix y = matmul(attn, v);
  add_inplace(y, residual);
  FeatureMatrix ff = mlp(y, prefix + ".ff", 2, w);
  add_inplace(ff, y);
  return ff;
}

}  // namespace

FeatureMatrix linear_nobias(const FeatureMatrix& x, const std::string& name,
                            const WeightStore& w) {
  return matmul_weight(x, w.get(name + ".weight"), name + ".weight");
}

FeatureMatrix linear(const FeatureMatrix& x, const std::string& name, const WeightStore& w) {
  FeatureMatrix y = matmul_weight(x, w.get(name + ".weight"), name + ".weight");
  const auto& bias = w.get(name + ".bias");
  if (bias.data.size() != static_cast<std::size_t>(y.cols())) {
    throw InvalidArgument("linear: bias \"" + name + ".bias\" has " +
                          std::to_string(bias.data.size()) + " values, expected " +
                          std::to_string(y.cols()));
  }
  for (int r = 0; r < y.rows(); ++r) {
    double* yr = y.row(r);
    for (int c = 0; c < y.cols(); ++c) yr[c] += bias.data[c];
  }
  return y;
}

void relu_inplace(FeatureMatrix& x) {
  for (auto& v : x.data()) v = v > 0.0 ? v : 0.0;
}

FeatureMatrix mlp(const FeatureMatrix& x, const std::string& prefix, int layers,
                  const WeightStore& w) {
  if (layers < 1) throw InvalidArgument("mlp: need at least one layer");
  FeatureMatrix y = x;
  for (int i = 0; i < layers; ++i) {
    y = linear(y, prefix + ".l" + std::to_string(i), w);
    if (i + 1 < layers) relu_inplace(y);
  }
  return y;
}

FeatureMatrix softmax_rows(const FeatureMatrix& x) {
  FeatureMatrix y(x.rows(), x.cols());
  for (int r = 0; r < x.rows(); ++r) {
    const double* xr = x.row(r);
    double* yr = y.row(r);
    double m = xr[0];
    for (int c = 1; c < x.cols(); ++c) m = std::max(m, xr[c]);
    double sum = 0.0;
    for (int c = 0; c < x.cols(); ++c) {
      yr[c] = std::exp(xr[c] - m);
      sum += yr[c];
    }
    for (int c = 0; c < x.cols(); ++c) yr[c] /= sum;
  }
  return y;
}

std::vector<double> sinusoidal_embed(double t, int channels) {
  if (channels < 2 || channels % 2 != 0) {
    throw InvalidArgument("sinusoidal_embed: channel count must be even and >= 2");
  }
  std::vector<double> row(channels);
  for (int k = 0; k < channels / 2; ++k) {
    const double freq = 1.0 / std::pow(10000.0, (2.0 * k) / channels);
    row[2 * k] = std::sin(t * freq);
    row[2 * k + 1] = std::cos(t * freq);
  }
  return row;
}

FeatureMatrix sinusoidal_embed_rows(const std::vector<double>& ts, int channels) {
  FeatureMatrix out(static_cast<int>(ts.size()), channels);
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const auto row = sinusoidal_embed(ts[i], channels);
    double* dst = out.row(static_cast<int>(i));
    for (int c = 0; c < channels; ++c) dst[c] = row[c];
  }
  return out;
}

FeatureMatrix self_attention(const FeatureMatrix& x, const std::string& prefix,
                             const WeightStore& w, bool scaled) {
  const FeatureMatrix q = linear_nobias(x, prefix + ".wq", w);
  const FeatureMatrix k = linear_nobias(x, prefix + ".wk", w);
  const FeatureMatrix v = linear_nobias(x, prefix + ".wv", w);
  return attention_tail(q, k, v, x, prefix, w, scaled, nullptr);
}

CrossAttentionResult cross_attention(const FeatureMatrix& q_src, const FeatureMatrix& kv_src,
                                     const std::string& prefix, const WeightStore& w,
                                     bool want_map, bool scaled) {
  const FeatureMatrix q = linear_nobias(q_src, prefix + ".wq", w);
  const FeatureMatrix k = linear_nobias(kv_src, prefix + ".wk", w);
  const FeatureMatrix v = linear_nobias(kv_src, prefix + ".wv", w);
  CrossAttentionResult res;
  res.out = attention_tail(q, k, v, q_src, prefix, w, scaled, want_map ? &res.attention : nullptr);
  return res;
}

FeatureMatrix ia_self_attention(const FeatureMatrix& f, const FeatureMatrix& h,
                                const std::string& prefix, const WeightStore& w, bool scaled) {
  if (f.rows() != h.rows() || f.cols() != h.cols()) {
    throw InvalidArgument("ia_self_attention: f is " + shape_str(f.rows(), f.cols()) +
                          " but h is " + shape_str(h.rows(), h.cols()));
  }
  FeatureMatrix q = linear_nobias(f, prefix + ".wq", w);
  FeatureMatrix k = linear_nobias(f, prefix + ".wk", w);
  const FeatureMatrix v = linear_nobias(f, prefix + ".wv", w);
  add_inplace(q, h);
  add_inplace(k, h);
  return attention_tail(q, k, v, f, prefix, w, scaled, nullptr);
}

std::vector<FeatureMatrix> conv2d_encoder(const std::vector<DepthMap>& maps,
                                          const std::string& prefix, const WeightStore& w,
                                          int out_channels) {
  if (maps.empty()) throw InvalidArgument("conv2d_encoder: no input maps");
  const int h0 = maps[0].height;
  const int w0 = maps[0].width;
  for (const auto& m : maps) {
    if (m.height != h0 || m.width != w0) {
      throw InvalidArgument("conv2d_encoder: mixed resolutions");
    }
  }
  if (h0 % 32 != 0 || w0 % 32 != 0) {
    throw InvalidArgument("conv2d_encoder: dimensions must be divisible by 32, got " +
                          shape_str(h0, w0));
  }

  const int plan[6] = {1, 16, 32, 64, 128, out_channels};
  std::vector<FeatureMatrix> out;
  out.reserve(maps.size());

  for (const auto& m : maps) {
    std::vector<double> img(m.depth.begin(), m.depth.end());  // (c, y, x), c = 1
    int ih = h0, iw = w0;
    for (int s = 0; s < 5; ++s) {
      const int cin = plan[s], cout = plan[s + 1];
      const auto& wt = w.get(prefix + ".s" + std::to_string(s + 1) + ".weight");
      const auto& bias = w.get(prefix + ".s" + std::to_string(s + 1) + ".bias");
      const int oh = ih / 2, ow = iw / 2;
      std::vector<double> next(static_cast<std::size_t>(cout) * oh * ow);
      parallel_for(static_cast<std::size_t>(cout), [&](std::size_t co) {
        for (int oy = 0; oy < oh; ++oy) {
          for (int ox = 0; ox < ow; ++ox) {
            double acc = bias.data[co];
            for (int ci = 0; ci < cin; ++ci) {
              for (int ky = 0; ky < 3; ++ky) {
                const int iy = oy * 2 + ky - 1;
                if (iy < 0 || iy >= ih) continue;
                for (int kx = 0; kx < 3; ++kx) {
                  const int ix = ox * 2 + kx - 1;
                  if (ix < 0 || ix >= iw) continue;
                  acc += img[(static_cast<std::size_t>(ci) * ih + iy) * iw + ix] *
                         wt.data[((co * cin + ci) * 3 + ky) * 3 + kx];
                }
              }
            }
            next[(co * oh + oy) * ow + ox] = acc > 0.0 ? acc : 0.0;  // stride-2 conv + relu
          }
        }
      });
      img = std::move(next);
      ih = oh;
      iw = ow;
    }
    // Flatten the final grid to row-major patch tokens.
    FeatureMatrix tokens(ih * iw, out_channels);
    for (int y = 0; y < ih; ++y) {
      for (int x = 0; x < iw; ++x) {
        double* row = tokens.row(y * iw + x);
        for (int c = 0; c < out_channels; ++c) {
          row[c] = img[(static_cast<std::size_t>(c) * ih + y) * iw + x];
        }
      }
    }
    out.push_back(std::move(tokens));
  }
  return out;
}

FeatureMatrix conv_transpose1d(const std::vector<double>& g, int n_out, const std::string& name,
                               const WeightStore& w) {
  if (n_out < 1) throw InvalidArgument("conv_transpose1d: n_out must be positive");
  const auto& wt = w.get(name + ".weight");
  const auto& bias = w.get(name + ".bias");
  if (wt.shape.size() != 3) throw InvalidArgument("conv_transpose1d: \"" + name + "\" not 3-D");
  const int cin = static_cast<int>(wt.shape[0]);
  const int cout = static_cast<int>(wt.shape[1]);
  const int n = static_cast<int>(wt.shape[2]);
  if (static_cast<int>(g.size()) != cin) {
    throw InvalidArgument("conv_transpose1d: input has " + std::to_string(g.size()) +
                          " channels, \"" + name + "\" expects " + std::to_string(cin));
  }
  if (n != n_out) {
    throw InvalidArgument("conv_transpose1d: requested " + std::to_string(n_out) +
                          " tokens but \"" + name + "\" expands to " + std::to_string(n));
  }
  FeatureMatrix out(n, cout);
  for (int t = 0; t < n; ++t) {
    double* row = out.row(t);
    for (int co = 0; co < cout; ++co) {
      double acc = bias.data[co];
      for (int ci = 0; ci < cin; ++ci) {
        acc += g[ci] * wt.data[(static_cast<std::size_t>(ci) * cout + co) * n + t];
      }
      row[co] = acc;
    }
  }
  return out;
}

}  // namespace pcfill
