#include <doctest.h>

#include "pcfill/errors.h"
#include "pcfill/metrics.h"
#include "test_support.h"

using namespace pcfill;
using namespace testsupport;

namespace {

const auto kVariants = {ChamferVariant::Eq5, ChamferVariant::L1Half, ChamferVariant::L2Squared};

PointCloud rotate_translate(const PointCloud& cloud, double angle, const Vec3& t) {
  PointCloud out;
  for (const auto& p : cloud) {
    out.push_back({std::cos(angle) * p.x - std::sin(angle) * p.y + t.x,
                   std::sin(angle) * p.x + std::cos(angle) * p.y + t.y, p.z + t.z});
  }
  return out;
}

}  // namespace

TEST_CASE("chamfer hand-evaluated single pair") {
  const PointCloud x{{0, 0, 0}};
  const PointCloud y{{1, 0, 0}};
  CHECK(chamfer(x, y, ChamferVariant::Eq5) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(chamfer(x, y, ChamferVariant::L1Half) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(chamfer(x, y, ChamferVariant::L2Squared) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("chamfer identities and symmetry") {
  Rng rng(131);
  const auto x = random_cloud(rng, 96);
  const auto y = random_cloud(rng, 80);
  PointCloud reordered = x;
  std::reverse(reordered.begin(), reordered.end());
  for (auto v : kVariants) {
    CHECK(chamfer(x, x, v) == 0.0);
    CHECK(chamfer(x, reordered, v) == 0.0);  // equal as sets
    CHECK(std::abs(chamfer(x, y, v) - chamfer(y, x, v)) <= 1e-12);
    CHECK(chamfer(x, y, v) > 0.0);  // distinct sets
  }
  CHECK_THROWS_AS(chamfer(PointCloud{}, y, ChamferVariant::Eq5), InvalidArgument);
}

TEST_CASE("chamfer matches the brute-force double loop") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed * 23);
    const auto x = random_cloud(rng, 512);
    const auto y = random_cloud(rng, 512);
    for (auto v : kVariants) {
      REQUIRE(std::abs(chamfer(x, y, v) - chamfer_bruteforce(x, y, v)) <= 1e-10);
    }
  }
}

TEST_CASE("rigid motion invariance and scale covariance") {
  Rng rng(132);
  const auto x = random_cloud(rng, 64);
  const auto y = random_cloud(rng, 56);
  const auto xr = rotate_translate(x, 0.83, {0.4, -1.2, 0.7});
  const auto yr = rotate_translate(y, 0.83, {0.4, -1.2, 0.7});
  for (auto v : kVariants) {
    CHECK(std::abs(chamfer(x, y, v) - chamfer(xr, yr, v)) <= 1e-9);
  }
  CHECK(std::abs(dcd(x, y) - dcd(xr, yr)) <= 1e-9);
  CHECK(std::abs(f1_score(x, y) - f1_score(xr, yr)) <= 1e-9);

  const double s = 2.31;
  PointCloud xs, ys;
  for (const auto& p : x) xs.push_back(p * s);
  for (const auto& p : y) ys.push_back(p * s);
  CHECK(std::abs(chamfer(xs, ys, ChamferVariant::Eq5) - s * chamfer(x, y, ChamferVariant::Eq5)) <=
        1e-9);
  CHECK(std::abs(chamfer(xs, ys, ChamferVariant::L2Squared) -
                 s * s * chamfer(x, y, ChamferVariant::L2Squared)) <= 1e-9);
}

TEST_CASE("chamfer gradient closed forms") {
  Rng rng(133);
  const auto x = random_cloud(rng, 32);
  for (auto v : kVariants) {
    for (const auto& g : chamfer_grad(x, x, v)) CHECK(norm(g) == 0.0);
  }

  const PointCloud a{{0.3, -0.2, 0.5}};
  const PointCloud b{{-0.1, 0.4, 0.2}};
  const auto g = chamfer_grad(a, b, ChamferVariant::L2Squared);
  const Vec3 want = 4.0 * (a[0] - b[0]);
  CHECK(distance(g[0], want) <= 1e-12);
}

TEST_CASE("chamfer gradient matches central finite differences") {
  const double step = 1e-5;
  int instances = 0;
  std::uint64_t seed = 1;
  while (instances < 20) {
    Rng rng(seed++ * 29);
    PointCloud x = random_cloud(rng, 64);
    const auto y = random_cloud(rng, 64);
    if (min_nn_margin(x, y) < 1e-3) continue;  // stay away from ties
    ++instances;
    for (auto v : kVariants) {
      const auto grad = chamfer_grad(x, y, v);
      for (std::size_t i = 0; i < x.size(); i += 13) {
        for (int axis = 0; axis < 3; ++axis) {
          auto bump = [&](double delta) {
            PointCloud xx = x;
            double* c = axis == 0 ? &xx[i].x : axis == 1 ? &xx[i].y : &xx[i].z;
            *c += delta;
            return chamfer(xx, y, v);
          };
          const double fd = (bump(step) - bump(-step)) / (2.0 * step);
          const double an = axis == 0 ? grad[i].x : axis == 1 ? grad[i].y : grad[i].z;
          const double scale = std::max({1.0, std::abs(fd), std::abs(an)});
          REQUIRE(std::abs(fd - an) / scale <= 1e-4);
        }
      }
    }
  }
}

TEST_CASE("total loss composition") {
  Rng rng(134);
  const auto gt = random_cloud(rng, 256);
  const auto p_c = gather(gt, fps(gt, 32));
  const auto p_1 = gather(gt, fps(gt, 64));
  const auto p_2 = gather(gt, fps(gt, 128));
  // Predictions that coincide with the fps-downsampled ground truth give
  // exactly zero.
  CHECK(total_loss(p_c, p_1, p_2, gt) == 0.0);

  const auto q_c = random_cloud(rng, 32);
  const auto q_1 = random_cloud(rng, 64);
  const auto q_2 = random_cloud(rng, 128);
  const double loss = total_loss(q_c, q_1, q_2, gt);
  double manual = 0.0;
  manual += chamfer(q_c, gather(gt, fps(gt, 32)), ChamferVariant::Eq5);
  manual += chamfer(q_1, gather(gt, fps(gt, 64)), ChamferVariant::Eq5);
  manual += chamfer(q_2, gather(gt, fps(gt, 128)), ChamferVariant::Eq5);
  CHECK(std::abs(loss - manual) <= 1e-12);
  CHECK(loss >= chamfer(q_c, gather(gt, fps(gt, 32)), ChamferVariant::Eq5));

  CHECK_THROWS_AS(total_loss(q_c, q_1, random_cloud(rng, 512), gt), InvalidArgument);
}

TEST_CASE("density-aware chamfer identities and oracle") {
  Rng rng(135);
  const auto x = random_cloud(rng, 128);
  CHECK(dcd(x, x) == 0.0);

  // Distant clouds approach 1 from below (0.2 offset keeps exp(-alpha d^2)
  // above the underflow threshold; much farther and it rounds to 1.0).
  PointCloud far = x;
  for (auto& p : far) p.x += 0.2;
  const double v = dcd(x, far);
  CHECK(v > 0.9);
  CHECK(v < 1.0);
  PointCloud very_far = x;
  for (auto& p : very_far) p.x += 1000.0;
  CHECK(dcd(x, very_far) <= 1.0);

  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng r2(seed * 31);
    const auto a = random_cloud(r2, 128);
    const auto b = random_cloud(r2, 128);
    REQUIRE(std::abs(dcd(a, b) - dcd_bruteforce(a, b, 1000.0)) <= 1e-10);
  }
  CHECK_THROWS_AS(dcd(x, PointCloud{}), InvalidArgument);
}

TEST_CASE("f1 score basics and monotonicity") {
  Rng rng(136);
  const auto x = random_cloud(rng, 64);
  CHECK(f1_score(x, x) == 1.0);

  PointCloud shifted = x;
  for (auto& p : shifted) p.x += 0.1;  // 10 * default tau
  CHECK(f1_score(x, shifted) == 0.0);

  const auto y = random_cloud(rng, 64);
  double prev = -1.0;
  for (double tau = 0.02; tau <= 2.0; tau += 0.02) {
    const double f = f1_score(x, y, tau);
    CHECK(f >= prev - 1e-12);
    prev = f;
  }
}

TEST_CASE("minimal matching distance scans the gallery") {
  Rng rng(137);
  std::vector<PointCloud> gallery;
  for (int g = 0; g < 10; ++g) gallery.push_back(random_cloud(rng, 64));
  const auto pred = gallery[6];
  const auto hit = mmd(pred, gallery);
  CHECK(hit.value == 0.0);
  CHECK(hit.best_index == 6);

  const auto probe = random_cloud(rng, 48);
  CHECK(mmd(probe, {gallery[2]}).value ==
        doctest::Approx(chamfer(probe, gallery[2], ChamferVariant::L2Squared)).epsilon(1e-12));

  const auto full = mmd(probe, gallery);
  double best = std::numeric_limits<double>::infinity();
  std::size_t arg = 0;
  for (std::size_t g = 0; g < gallery.size(); ++g) {
    const double v = chamfer_bruteforce(probe, gallery[g], ChamferVariant::L2Squared);
    if (v < best) {
      best = v;
      arg = g;
    }
  }
  CHECK(std::abs(full.value - best) <= 1e-10);
  CHECK(full.best_index == arg);

  CHECK_THROWS_AS(mmd(probe, {}), InvalidArgument);
}

TEST_CASE("toy fit is a fixed point at the target and records nonnegative losses") {
  Rng rng(138);
  const auto target = random_cloud(rng, 32);
  const auto res = toy_fit(target, target, 10, 0.05);
  for (double v : res.loss_curve) CHECK(v == 0.0);
  CHECK(res.loss_curve.size() == 11);
  CHECK(max_point_distance(res.cloud, target) == 0.0);

  const auto x0 = random_cloud(rng, 32);
  const auto run = toy_fit(x0, target, 50, 0.05);
  for (double v : run.loss_curve) CHECK(v >= 0.0);
  CHECK(run.loss_curve.back() < run.loss_curve.front());
}

TEST_CASE("evaluate_pair fills requested metrics and directional parts") {
  Rng rng(139);
  const auto pred = random_cloud(rng, 64);
  const auto gt = random_cloud(rng, 64);
  const auto rep = evaluate_pair(pred, gt, true, true, true, true, 0.01, 1000.0);
  const auto l1 = chamfer_parts(pred, gt, ChamferVariant::L1Half);
  CHECK(rep.cd_l1 == doctest::Approx(l1.value).epsilon(1e-12));
  CHECK(rep.cd_l1_pred_to_gt == doctest::Approx(l1.forward_mean).epsilon(1e-12));
  CHECK(rep.cd_l1_gt_to_pred == doctest::Approx(l1.backward_mean).epsilon(1e-12));
  CHECK(rep.dcd == doctest::Approx(dcd(pred, gt)).epsilon(1e-12));
  CHECK(rep.f1 == doctest::Approx(f1_score(pred, gt)).epsilon(1e-12));

  const auto partial = evaluate_pair(pred, gt, false, true, false, false);
  CHECK(partial.cd_l1 == -1.0);
  CHECK(partial.cd_l2 >= 0.0);
}
