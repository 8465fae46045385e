#include <doctest.h>

#include "pcfill/errors.h"
#include "pcfill/pipeline.h"
#include "test_support.h"

using namespace pcfill;
using namespace testsupport;

namespace {

// pcn-shaped profile with narrow feature widths so forward passes stay
// fast; every point-count contract is unchanged.
Profile pcn_narrow(std::uint64_t seed = 0) {
  Profile p = Profile::preset("pcn");
  p.channels = 48;
  p.point_feat = 32;
  p.sa1_mlp = {16, 32};
  p.sa2_out = 32;
  p.ec1_out = 16;
  p.ec2_out = 32;
  p.sdg_dims = {64, 48};
  p.seed = seed;
  return p;
}

Profile snet_narrow(std::uint64_t seed = 0) {
  Profile p = Profile::preset("snet55");
  p.channels = 48;
  p.point_feat = 32;
  p.sa1_mlp = {16, 32};
  p.sa2_out = 32;
  p.ec1_out = 16;
  p.ec2_out = 32;
  p.sdg_dims = {64, 48};
  p.seed = seed;
  return p;
}

}  // namespace

TEST_CASE("encode_points yields the configured descriptor width") {
  Profile p = Profile::preset("pcn");
  p.seed = 71;
  const auto w = init_weights(p);
  Rng rng(72);
  const auto cloud = random_cloud(rng, 2048, 0.5);
  const auto f_p = encode_points(cloud, p, w);
  CHECK(f_p.size() == 256);  // SA stack output width
  for (double v : f_p) CHECK(std::isfinite(v));
}

TEST_CASE("encode_points rejects undersized clouds") {
  Profile p = Profile::preset("pcn");
  const auto w = init_weights(p);
  Rng rng(73);
  CHECK_THROWS_AS(encode_points(random_cloud(rng, 100), p, w), InvalidArgument);
}

TEST_CASE("point descriptor is invariant under seed-fixing permutations") {
  Profile p = Profile::preset("tiny-test");
  p.seed = 74;
  const auto w = init_weights(p);
  Rng rng(75);
  const auto cloud = random_cloud(rng, p.n_input, 0.9);
  const auto base = encode_points(cloud, p, w);

  PointCloud rotated{cloud[0]};
  rotated.insert(rotated.end(), cloud.begin() + 99, cloud.end());
  rotated.insert(rotated.end(), cloud.begin() + 1, cloud.begin() + 99);
  const auto moved = encode_points(rotated, p, w);
  REQUIRE(base.size() == moved.size());
  for (std::size_t i = 0; i < base.size(); ++i) {
    REQUIRE(std::abs(base[i] - moved[i]) <= 1e-9);
  }
}

TEST_CASE("duplicating every point then resampling reproduces the descriptor") {
  Profile p = Profile::preset("tiny-test");
  p.seed = 76;
  const auto w = init_weights(p);
  Rng rng(77);
  const auto cloud = random_cloud(rng, p.n_input, 0.9);

  PointCloud doubled;
  for (const auto& q : cloud) {
    doubled.push_back(q);
    doubled.push_back(q);
  }
  const auto resampled = gather(doubled, fps(doubled, p.n_input));
  const auto a = encode_points(cloud, p, w);
  const auto b = encode_points(resampled, p, w);
  for (std::size_t i = 0; i < a.size(); ++i) REQUIRE(std::abs(a[i] - b[i]) <= 1e-9);
}

TEST_CASE("encode_views flattens each view to patch tokens") {
  Profile p = Profile::preset("tiny-test");
  p.seed = 78;
  const auto w = init_weights(p);
  Rng rng(79);
  const auto cloud = random_cloud(rng, 256, 0.9);
  ProjectionParams params;
  params.resolution = p.resolution;
  params.camera_distance = p.camera_distance;
  params.densify_radius = p.densify_radius;
  std::vector<DepthMap> maps;
  for (const auto& vp : orthogonal_viewpoints(p.camera_distance)) {
    maps.push_back(project_depth(cloud, vp, params));
  }
  const auto tokens = encode_views(maps, p, w);
  REQUIRE(tokens.size() == 3);
  for (const auto& t : tokens) {
    CHECK(t.rows() == (p.resolution / 32) * (p.resolution / 32));
    CHECK(t.cols() == p.channels);
  }

  const auto again = encode_views({maps[0], maps[0]}, p, w);
  CHECK(max_abs_diff(again[0], again[1]) == 0.0);
}

TEST_CASE("stage-1 fusion emits one pooled row per view") {
  Profile p = Profile::preset("tiny-test");
  p.seed = 80;
  const auto w = init_weights(p);
  Rng rng(81);
  std::vector<double> f_p(p.point_feat);
  for (auto& v : f_p) v = rng.uniform(-1, 1);
  std::vector<FeatureMatrix> tokens;
  for (int i = 0; i < 3; ++i) tokens.push_back(random_features(rng, 4, p.channels));
  tokens.push_back(tokens[1]);  // duplicated view
  const auto pooled = fuse_stage1(tokens, f_p, p, w);
  CHECK(pooled.rows() == 4);
  CHECK(pooled.cols() == p.channels);
  for (int c = 0; c < p.channels; ++c) CHECK(pooled(1, c) == pooled(3, c));
}

TEST_CASE("stage-1 fusion is invariant to token order within a view") {
  Profile p = Profile::preset("tiny-test");
  p.seed = 82;
  const auto w = init_weights(p);
  Rng rng(83);
  std::vector<double> f_p(p.point_feat);
  for (auto& v : f_p) v = rng.uniform(-1, 1);
  const auto tokens = random_features(rng, 4, p.channels);
  FeatureMatrix shuffled(4, p.channels);
  const int order[4] = {2, 0, 3, 1};
  for (int i = 0; i < 4; ++i)
    for (int c = 0; c < p.channels; ++c) shuffled(i, c) = tokens(order[i], c);
  const auto a = fuse_stage1({tokens}, f_p, p, w);
  const auto b = fuse_stage1({shuffled}, f_p, p, w);
  CHECK(max_abs_diff(a, b) <= 1e-9);
}

TEST_CASE("stage-2 fusion: single view passes through, viewpoints matter") {
  Profile p = Profile::preset("tiny-test");
  p.seed = 84;
  const auto w = init_weights(p);
  Rng rng(85);
  std::vector<double> f_p(p.point_feat);
  for (auto& v : f_p) v = rng.uniform(-1, 1);

  const auto one = random_features(rng, 1, p.channels);
  const auto vps1 = projection_viewpoints(1, p.camera_distance);
  const auto fg1 = fuse_stage2(one, f_p, vps1, p, w);
  CHECK(fg1.size() == static_cast<std::size_t>(p.channels));

  const auto three = random_features(rng, 3, p.channels);
  auto vps = projection_viewpoints(3, p.camera_distance);
  const auto fg = fuse_stage2(three, f_p, vps, p, w);

  // Joint permutation leaves the descriptor unchanged.
  FeatureMatrix permuted(3, p.channels);
  const int order[3] = {1, 2, 0};
  for (int i = 0; i < 3; ++i)
    for (int c = 0; c < p.channels; ++c) permuted(i, c) = three(order[i], c);
  std::vector<Viewpoint> vps_p{vps[1], vps[2], vps[0]};
  const auto fg_joint = fuse_stage2(permuted, f_p, vps_p, p, w);
  double m = 0.0;
  for (std::size_t i = 0; i < fg.size(); ++i) m = std::max(m, std::abs(fg[i] - fg_joint[i]));
  CHECK(m <= 1e-9);

  // Swapping viewpoints without the features changes the result.
  std::vector<Viewpoint> swapped{vps[1], vps[0], vps[2]};
  const auto fg_bad = fuse_stage2(three, f_p, swapped, p, w);
  double diff = 0.0;
  for (std::size_t i = 0; i < fg.size(); ++i) diff = std::max(diff, std::abs(fg[i] - fg_bad[i]));
  CHECK(diff > 1e-12);

  CHECK_THROWS_AS(fuse_stage2(three, f_p, vps1, p, w), InvalidArgument);
}

TEST_CASE("decode_coarse emits the requested point count") {
  Profile p = Profile::preset("tiny-test");
  p.seed = 86;
  const auto w = init_weights(p);
  Rng rng(87);
  std::vector<double> f_g(p.channels);
  for (auto& v : f_g) v = rng.uniform(-1, 1);
  const auto cloud = decode_coarse(f_g, p.n0, p, w);
  CHECK(cloud.size() == static_cast<std::size_t>(p.n0));

  // Zero descriptor with zero-initialized biases collapses to the origin.
  const auto zeros = decode_coarse(std::vector<double>(p.channels, 0.0), p.n0, p, w);
  for (const auto& q : zeros) CHECK(norm(q) == 0.0);
}

TEST_CASE("svfnet forward satisfies both profile contracts") {
  Rng rng(88);
  {
    Profile p = pcn_narrow(89);
    const auto w = init_weights(p);
    const auto cloud = random_cloud(rng, p.n_input, 0.5);
    const auto res = svfnet_forward(cloud, p, w);
    CHECK(res.p_c.size() == 512);
    CHECK(res.p_0.size() == 512);
    CHECK(res.depth_maps.size() == 3);
    CHECK(res.f_g.size() == static_cast<std::size_t>(p.channels));
  }
  {
    Profile p = snet_narrow(90);
    const auto w = init_weights(p);
    const auto cloud = random_cloud(rng, p.n_input, 0.9);
    const auto res = svfnet_forward(cloud, p, w);
    CHECK(res.p_c.size() == 1024);
    CHECK(res.p_0.size() == 1024);
  }
}

TEST_CASE("svfnet forward is bit-deterministic") {
  Profile p = Profile::preset("tiny-test");
  p.seed = 91;
  const auto w = init_weights(p);
  Rng rng(92);
  const auto cloud = random_cloud(rng, p.n_input, 0.9);
  const auto a = svfnet_forward(cloud, p, w);
  const auto b = svfnet_forward(cloud, p, w);
  CHECK(a.p_0 == b.p_0);
  CHECK(a.p_c == b.p_c);
}

TEST_CASE("depth-branch ablation keeps every shape contract") {
  Profile p = Profile::preset("tiny-test");
  p.seed = 93;
  const auto w = init_weights(p);
  Rng rng(94);
  const auto cloud = random_cloud(rng, p.n_input, 0.9);
  PipelineOptions opts;
  opts.no_projection = true;
  const auto res = svfnet_forward(cloud, p, w, opts);
  CHECK(res.p_c.size() == static_cast<std::size_t>(p.n0));
  CHECK(res.p_0.size() == static_cast<std::size_t>(p.n0));
  CHECK(res.depth_maps.empty());
  const auto trace = complete_cloud(cloud, p, w, opts);
  CHECK(trace.p_2.size() == static_cast<std::size_t>(p.n0 * p.rates[0] * p.rates[1]));
}
