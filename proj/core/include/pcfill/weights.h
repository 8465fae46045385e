#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

namespace pcfill {

struct Profile;

// One entry of the model's tensor catalog. fan_in/fan_out drive the
// uniform Xavier-style init range; biases are zero-initialized.
struct TensorSpec {
  std::string name;
  std::vector<std::uint32_t> shape;
  std::uint32_t fan_in = 0;
  std::uint32_t fan_out = 0;
  bool bias = false;
};

// Named-tensor container for every learnable parameter. Insertion order is
// preserved and defines both the initialization draw order and the on-disk
// tensor order.
class WeightStore {
 public:
  struct Tensor {
    std::vector<std::uint32_t> shape;
    std::vector<float> data;
  };

  void add(const std::string& name, std::vector<std::uint32_t> shape, std::vector<float> data);
  bool contains(const std::string& name) const { return map_.count(name) != 0; }
  // Fails fast with the missing tensor's name.
  const Tensor& get(const std::string& name) const;
  const std::vector<std::string>& names() const { return order_; }
  std::size_t size() const { return order_.size(); }

  // In-memory metadata; not part of the PSW1 container.
  std::string profile_name;
  std::uint64_t seed = 0;

 private:
  std::vector<std::string> order_;
  std::unordered_map<std::string, Tensor> map_;
};

bool bitwise_equal(const WeightStore& a, const WeightStore& b);

// Full tensor catalog for a profile, in the fixed initialization order.
std::vector<TensorSpec> weight_catalog(const Profile& profile);

// Deterministic initialization: one splitmix64 stream seeded with
// profile.seed fills the catalog in order; weights ~ U(-a, a) with
// a = sqrt(6 / (fan_in + fan_out)), biases exactly zero.
WeightStore init_weights(const Profile& profile);

// PSW1 container: magic "PSW1", u32 tensor count; per tensor u16 name
// length, name bytes, u8 rank, rank*u32 dims, float32 LE data; trailing
// u32 CRC32 of all preceding bytes.
void save_weights(const WeightStore& w, const std::filesystem::path& path);
WeightStore load_weights(const std::filesystem::path& path);

// Checks that the store holds exactly the catalog tensors with the right
// shapes; throws InvalidArgument otherwise.
void validate_weights(const WeightStore& w, const Profile& profile);

}  // namespace pcfill
