#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace pcfill {

// Everything that parameterizes a run: input/output point counts, the
// projection setup, and every layer width. The three presets fix the two
// benchmark configurations and a miniature profile for fast tests; any
// field can be overridden through a config file or CLI flag.
struct Profile {
  std::string name = "pcn";

  int n_input = 2048;               // expected partial-input size
  int n0 = 512;                     // coarse/merged point count (= |P_c|)
  std::array<int, 2> rates{4, 8};   // per-step upsampling rates

  int n_views = 3;
  int resolution = 224;
  double camera_distance = 0.7;
  double fov_degrees = 60.0;
  int densify_radius = 1;

  int channels = 512;               // view-feature / fusion / decoder width
  int point_feat = 256;             // global point descriptor width

  // Point encoder: two sampled set-abstraction stages plus a global stage.
  std::array<int, 2> sa_n{512, 128};
  std::array<int, 2> sa_k{16, 16};
  std::array<int, 2> sa1_mlp{64, 128};
  int sa2_out = 256;

  // Partial-input local encoder: edge convolution, downsample, edge
  // convolution.
  std::array<int, 2> ec_k{16, 8};
  int ec1_out = 64;
  int ec_fps = 512;
  int ec2_out = 256;

  // Refinement: attention widths per step, offset feature width, decoder
  // depth (self-attention blocks after each path).
  std::array<int, 2> sdg_dims{768, 512};
  int offset_feat = 128;
  int decoder_depth = 2;

  double gamma = 0.2;
  std::uint64_t seed = 0;

  static Profile preset(const std::string& name);
  void validate() const;
};

// Line-oriented `key = value` config with `#` comments. Unknown keys are
// rejected.
void apply_config_file(Profile& profile, const std::filesystem::path& path);
void apply_config_kv(Profile& profile, const std::string& key, const std::string& value);

// Structural ablation switches (network variants that must still satisfy
// every shape contract).
struct PipelineOptions {
  bool no_projection = false;          // skip the depth branch
  bool no_incompleteness = false;      // zero incompleteness embedding
  bool no_alignment = false;           // use the analysis path only
  bool no_analysis = false;            // use the alignment path only
  std::optional<double> fixed_alpha;   // bypass the learned gate
};

}  // namespace pcfill
