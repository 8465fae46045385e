#include "pcfill/weights.h"

#include <zlib.h>

#include <cmath>
#include <cstring>

#include "binary_io.h"
#include "pcfill/config.h"
#include "pcfill/errors.h"
#include "pcfill/rng.h"

namespace pcfill {

static const char kWeightMagic[4] = {'P', 'S', 'W', '1'};

void WeightStore::add(const std::string& name, std::vector<std::uint32_t> shape,
                      std::vector<float> data) {
  if (map_.count(name)) throw InvalidArgument("WeightStore: duplicate tensor \"" + name + "\"");
  std::size_t count = 1;
  for (auto d : shape) count *= d;
  if (count != data.size()) {
    throw InvalidArgument("WeightStore: tensor \"" + name + "\" has " +
                          std::to_string(data.size()) + " values for a shape of " +
                          std::to_string(count));
  }
  order_.push_back(name);
  map_.emplace(name, Tensor{std::move(shape), std::move(data)});
}

const WeightStore::Tensor& WeightStore::get(const std::string& name) const {
  auto it = map_.find(name);
  if (it == map_.end()) throw InvalidArgument("WeightStore: missing tensor \"" + name + "\"");
  return it->second;
}

bool bitwise_equal(const WeightStore& a, const WeightStore& b) {
  if (a.names() != b.names()) return false;
  for (const auto& name : a.names()) {
    const auto& ta = a.get(name);
    const auto& tb = b.get(name);
    if (ta.shape != tb.shape) return false;
    if (std::memcmp(ta.data.data(), tb.data.data(), ta.data.size() * sizeof(float)) != 0) {
      return false;
    }
  }
  return true;
}

namespace {

// Catalog builder. Conventions: `<name>.weight` is (in x out) with a
// matching `<name>.bias` unless the layer is an attention projection,
// which is bias-free. Order of addition fixes the initialization stream.
class Catalog {
 public:
  void linear(const std::string& name, int in, int out) {
    weight(name + ".weight", {u(in), u(out)}, in, out);
    bias(name + ".bias", {u(out)});
  }
  void proj(const std::string& name, int in, int out) {
    weight(name + ".weight", {u(in), u(out)}, in, out);
  }
  void conv3x3(const std::string& name, int in, int out) {
    weight(name + ".weight", {u(out), u(in), 3, 3}, in * 9, out * 9);
    bias(name + ".bias", {u(out)});
  }
  void conv_transpose(const std::string& name, int in, int out, int n) {
    weight(name + ".weight", {u(in), u(out), u(n)}, in, out);
    bias(name + ".bias", {u(out)});
  }
  // Attention block: Q/K/V projections plus the two-layer feed-forward.
  void attention(const std::string& prefix, int dim, int kv_dim) {
    proj(prefix + ".wq", dim, dim);
    proj(prefix + ".wk", kv_dim, dim);
    proj(prefix + ".wv", kv_dim, dim);
    linear(prefix + ".ff.l0", dim, dim);
    linear(prefix + ".ff.l1", dim, dim);
  }

  std::vector<TensorSpec> specs;

 private:
  static std::uint32_t u(int v) { return static_cast<std::uint32_t>(v); }
  void weight(const std::string& name, std::vector<std::uint32_t> shape, int fan_in, int fan_out) {
    specs.push_back({name, std::move(shape), u(fan_in), u(fan_out), false});
  }
  void bias(const std::string& name, std::vector<std::uint32_t> shape) {
    specs.push_back({name, std::move(shape), 0, 0, true});
  }
};

}  // namespace

std::vector<TensorSpec> weight_catalog(const Profile& p) {
  p.validate();
  Catalog c;
  const int C = p.channels;

  // 2D depth-map encoder: fixed 1->16->32->64->128->C plan.
  const int plan[6] = {1, 16, 32, 64, 128, C};
  for (int s = 0; s < 5; ++s) {
    c.conv3x3("svf.enc2d.s" + std::to_string(s + 1), plan[s], plan[s + 1]);
  }

  // Point encoder.
  c.linear("svf.encp.sa1.l0", 3, p.sa1_mlp[0]);
  c.linear("svf.encp.sa1.l1", p.sa1_mlp[0], p.sa1_mlp[1]);
  c.linear("svf.encp.sa2.l0", 3 + p.sa1_mlp[1], p.sa2_out);
  c.linear("svf.encp.sa3.l0", 2 * p.sa2_out, p.point_feat);

  // Two-stage feature fusion.
  c.linear("svf.fuse1.cond", p.point_feat, C);
  c.proj("svf.fuse1.wq", C, C);
  c.proj("svf.fuse1.wk", C, C);
  c.proj("svf.fuse1.wv", C, C);
  c.linear("svf.fuse2.cond", p.point_feat, C);
  c.linear("svf.fuse2.vp", 3, C);
  c.proj("svf.fuse2.wq", C, C);
  c.proj("svf.fuse2.wk", C, C);
  c.proj("svf.fuse2.wv", C, C);

  // Coarse decoder.
  c.conv_transpose("svf.dec.expand", C, p.offset_feat, p.n0);
  c.linear("svf.dec.in", p.offset_feat, C);
  c.attention("svf.dec.attn", C, C);
  c.linear("svf.dec.out", C, 3);

  // Refinement tensors shared by both steps.
  c.linear("sdg.ec1.l0", 6, p.ec1_out);
  c.linear("sdg.ec2.l0", 2 * p.ec1_out, p.ec2_out);
  c.linear("sdg.offset.l0", p.offset_feat, 64);
  c.linear("sdg.offset.l1", 64, 3);

  // Per-step tensors (widths differ per step, so these cannot be shared).
  for (int it = 0; it < 2; ++it) {
    const std::string pre = "sdg.i" + std::to_string(it + 1);
    const int D = p.sdg_dims[it];
    c.linear(pre + ".embed", 3 + C, D);
    c.attention(pre + ".ia", D, D);
    for (int b = 0; b < p.decoder_depth; ++b) {
      c.attention(pre + ".qdec.b" + std::to_string(b), D, D);
    }
    c.attention(pre + ".cross", D, p.ec2_out);
    for (int b = 0; b < p.decoder_depth; ++b) {
      c.attention(pre + ".hdec.b" + std::to_string(b), D, D);
    }
    const int gate_in = (it == 0) ? 2 * D : 2 * D + p.offset_feat;
    c.linear(pre + ".gate.l0", gate_in, 64);
    c.linear(pre + ".gate.l1", 64, 1);
    c.linear(pre + ".up", D, p.rates[it] * p.offset_feat);
  }

  return c.specs;
}

WeightStore init_weights(const Profile& profile) {
  const auto catalog = weight_catalog(profile);
  Rng rng(profile.seed);
  WeightStore w;
  w.profile_name = profile.name;
  w.seed = profile.seed;
  for (const auto& spec : catalog) {
    std::size_t count = 1;
    for (auto d : spec.shape) count *= d;
    std::vector<float> data(count, 0.0f);
    if (!spec.bias) {
      const double a = std::sqrt(6.0 / (static_cast<double>(spec.fan_in) + spec.fan_out));
      for (auto& v : data) v = static_cast<float>(rng.uniform(-a, a));
    }
    w.add(spec.name, spec.shape, std::move(data));
  }
  return w;
}

void validate_weights(const WeightStore& w, const Profile& profile) {
  const auto catalog = weight_catalog(profile);
  if (w.size() != catalog.size()) {
    throw InvalidArgument("weights: store has " + std::to_string(w.size()) +
                          " tensors, profile \"" + profile.name + "\" expects " +
                          std::to_string(catalog.size()));
  }
  for (const auto& spec : catalog) {
    if (!w.contains(spec.name)) {
      throw InvalidArgument("weights: missing tensor \"" + spec.name + "\" for profile \"" +
                            profile.name + "\"");
    }
    if (w.get(spec.name).shape != spec.shape) {
      throw InvalidArgument("weights: tensor \"" + spec.name + "\" has the wrong shape for "
                            "profile \"" + profile.name + "\"");
    }
  }
}

namespace {

void append(std::vector<unsigned char>& buf, const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  buf.insert(buf.end(), p, p + n);
}

template <typename T>
void append_value(std::vector<unsigned char>& buf, T v) {
  append(buf, &v, sizeof(T));
}

}  // namespace

void save_weights(const WeightStore& w, const std::filesystem::path& path) {
  std::vector<unsigned char> buf;
  append(buf, kWeightMagic, 4);
  append_value<std::uint32_t>(buf, static_cast<std::uint32_t>(w.size()));
  for (const auto& name : w.names()) {
    const auto& t = w.get(name);
    if (name.size() > 0xffff) throw InvalidArgument("save_weights: tensor name too long");
    append_value<std::uint16_t>(buf, static_cast<std::uint16_t>(name.size()));
    append(buf, name.data(), name.size());
    append_value<std::uint8_t>(buf, static_cast<std::uint8_t>(t.shape.size()));
    for (auto d : t.shape) append_value<std::uint32_t>(buf, d);
    append(buf, t.data.data(), t.data.size() * sizeof(float));
  }
  const auto crc = static_cast<std::uint32_t>(crc32_z(0, buf.data(), buf.size()));
  append_value<std::uint32_t>(buf, crc);

  auto f = detail::open_out(path);
  detail::put_bytes(f, buf.data(), buf.size());
  if (!f) throw InvalidArgument("write failed: " + path.string());
}

WeightStore load_weights(const std::filesystem::path& path) {
  const auto buf = detail::read_file(path);
  if (buf.size() < 12) throw FormatError(path.string() + ": truncated file", buf.size());

  const std::size_t body = buf.size() - 4;
  std::uint32_t stored_crc;
  std::memcpy(&stored_crc, buf.data() + body, 4);
  const auto crc = static_cast<std::uint32_t>(crc32_z(0, buf.data(), body));
  if (crc != stored_crc) throw FormatError(path.string() + ": CRC mismatch", body);

  detail::ByteReader r(buf.data(), body, path.string());
  r.expect_magic(kWeightMagic);
  const auto count = r.get<std::uint32_t>();
  WeightStore w;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::size_t name_at = r.offset();
    const auto name_len = r.get<std::uint16_t>();
    const std::string name = r.get_string(name_len);
    const auto rank = r.get<std::uint8_t>();
    std::vector<std::uint32_t> shape(rank);
    std::size_t elems = 1;
    for (int d = 0; d < rank; ++d) {
      shape[d] = r.get<std::uint32_t>();
      elems *= shape[d];
    }
    if (elems * sizeof(float) > r.remaining()) {
      throw FormatError(path.string() + ": truncated tensor \"" + name + "\"", r.offset());
    }
    std::vector<float> data(elems);
    r.get_floats(data.data(), elems);
    if (w.contains(name)) {
      throw FormatError(path.string() + ": duplicate tensor \"" + name + "\"", name_at);
    }
    w.add(name, std::move(shape), std::move(data));
  }
  r.expect_end();
  return w;
}

}  // namespace pcfill
