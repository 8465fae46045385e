#include "pcfill/metrics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "pcfill/errors.h"
#include "pcfill/parallel.h"
#include "pcfill/rng.h"

namespace pcfill {

namespace {

struct NearestResult {
  std::vector<std::uint32_t> index;  // nearest neighbor per query, lowest index on ties
  std::vector<double> sq_dist;
};

NearestResult nearest(const PointCloud& query, const PointCloud& target) {
  NearestResult res;
  res.index.resize(query.size());
  res.sq_dist.resize(query.size());
  parallel_for(query.size(), [&](std::size_t i) {
    double best = std::numeric_limits<double>::infinity();
    std::uint32_t best_j = 0;
    for (std::size_t j = 0; j < target.size(); ++j) {
      const double d = squared_distance(query[i], target[j]);
      if (d < best) {
        best = d;
        best_j = static_cast<std::uint32_t>(j);
      }
    }
    res.index[i] = best_j;
    res.sq_dist[i] = best;
  });
  return res;
}

void require_nonempty(const PointCloud& x, const PointCloud& y, const char* who) {
  if (x.empty() || y.empty()) throw InvalidArgument(std::string(who) + ": empty point cloud");
}

double directional_mean(const std::vector<double>& sq, bool squared) {
  double sum = 0.0;
  for (double v : sq) sum += squared ? v : std::sqrt(v);
  return sum / static_cast<double>(sq.size());
}

}  // namespace

ChamferParts chamfer_parts(const PointCloud& x, const PointCloud& y, ChamferVariant variant) {
  require_nonempty(x, y, "chamfer");
  const bool squared = variant == ChamferVariant::L2Squared;
  ChamferParts parts;
  parts.forward_mean = directional_mean(nearest(x, y).sq_dist, squared);
  parts.backward_mean = directional_mean(nearest(y, x).sq_dist, squared);
  const double sum = parts.forward_mean + parts.backward_mean;
  parts.value = variant == ChamferVariant::L1Half ? 0.5 * sum : sum;
  return parts;
}

double chamfer(const PointCloud& x, const PointCloud& y, ChamferVariant variant) {
  return chamfer_parts(x, y, variant).value;
}

std::vector<Vec3> chamfer_grad(const PointCloud& x, const PointCloud& y, ChamferVariant variant) {
  require_nonempty(x, y, "chamfer_grad");
  const auto xy = nearest(x, y);
  const auto yx = nearest(y, x);
  const double inv_x = 1.0 / static_cast<double>(x.size());
  const double inv_y = 1.0 / static_cast<double>(y.size());
  const double factor = variant == ChamferVariant::L1Half ? 0.5 : 1.0;

  std::vector<Vec3> grad(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const Vec3 d = x[i] - y[xy.index[i]];
    if (variant == ChamferVariant::L2Squared) {
      grad[i] += 2.0 * inv_x * d;
    } else {
      const double r = std::sqrt(xy.sq_dist[i]);
      // Norm gradient undefined at 0; the 0 subgradient is used.
      if (r > 0.0) grad[i] += (factor * inv_x / r) * d;
    }
  }
  for (std::size_t j = 0; j < y.size(); ++j) {
    const std::size_t i = yx.index[j];
    const Vec3 d = x[i] - y[j];
    if (variant == ChamferVariant::L2Squared) {
      grad[i] += 2.0 * inv_y * d;
    } else {
      const double r = std::sqrt(yx.sq_dist[j]);
      if (r > 0.0) grad[i] += (factor * inv_y / r) * d;
    }
  }
  return grad;
}

double total_loss(const PointCloud& p_c, const PointCloud& p_1, const PointCloud& p_2,
                  const PointCloud& p_gt) {
  const std::size_t need = std::max({p_c.size(), p_1.size(), p_2.size()});
  if (p_gt.size() < need) {
    throw InvalidArgument("total_loss: ground truth has " + std::to_string(p_gt.size()) +
                          " points, predictions need " + std::to_string(need));
  }
  double loss = 0.0;
  for (const PointCloud* pred : {&p_c, &p_1, &p_2}) {
    const PointCloud gt_ds = gather(p_gt, fps(p_gt, static_cast<int>(pred->size())));
    loss += chamfer(*pred, gt_ds, ChamferVariant::Eq5);
  }
  return loss;
}

double dcd(const PointCloud& x, const PointCloud& y, double alpha) {
  require_nonempty(x, y, "dcd");
  if (!(alpha > 0.0)) throw InvalidArgument("dcd: alpha must be positive");
  const auto xy = nearest(x, y);
  const auto yx = nearest(y, x);

  std::vector<std::uint32_t> match_y(y.size(), 0);  // how many x chose each y
  for (auto j : xy.index) ++match_y[j];
  std::vector<std::uint32_t> match_x(x.size(), 0);  // how many y chose each x
  for (auto i : yx.index) ++match_x[i];

  double term_x = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    term_x += 1.0 - std::exp(-alpha * xy.sq_dist[i]) / match_y[xy.index[i]];
  }
  double term_y = 0.0;
  for (std::size_t j = 0; j < y.size(); ++j) {
    term_y += 1.0 - std::exp(-alpha * yx.sq_dist[j]) / match_x[yx.index[j]];
  }
  return 0.5 * (term_x / x.size() + term_y / y.size());
}

double f1_score(const PointCloud& x, const PointCloud& y, double tau) {
  require_nonempty(x, y, "f1_score");
  if (!(tau > 0.0)) throw InvalidArgument("f1_score: tau must be positive");
  const auto xy = nearest(x, y);
  const auto yx = nearest(y, x);
  std::size_t hit_x = 0;
  for (double sq : xy.sq_dist) {
    if (std::sqrt(sq) <= tau) ++hit_x;
  }
  std::size_t hit_y = 0;
  for (double sq : yx.sq_dist) {
    if (std::sqrt(sq) <= tau) ++hit_y;
  }
  const double precision = static_cast<double>(hit_x) / x.size();
  const double recall = static_cast<double>(hit_y) / y.size();
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

MmdResult mmd(const PointCloud& pred, const std::vector<PointCloud>& gallery) {
  if (gallery.empty()) throw InvalidArgument("mmd: empty gallery");
  MmdResult best{std::numeric_limits<double>::infinity(), 0};
  for (std::size_t g = 0; g < gallery.size(); ++g) {
    const double v = chamfer(pred, gallery[g], ChamferVariant::L2Squared);
    if (v < best.value) best = {v, g};
  }
  return best;
}

FitResult toy_fit(const PointCloud& x0, const PointCloud& target, int steps, double lr) {
  if (steps < 1) throw InvalidArgument("toy_fit: steps must be >= 1");
  if (!(lr > 0.0)) throw InvalidArgument("toy_fit: lr must be positive");
  FitResult res;
  res.cloud = x0;
  res.loss_curve.reserve(steps + 1);
  res.loss_curve.push_back(chamfer(res.cloud, target, ChamferVariant::L2Squared));
  for (int s = 0; s < steps; ++s) {
    const auto grad = chamfer_grad(res.cloud, target, ChamferVariant::L2Squared);
    for (std::size_t i = 0; i < res.cloud.size(); ++i) {
      res.cloud[i] -= lr * grad[i];
    }
    res.loss_curve.push_back(chamfer(res.cloud, target, ChamferVariant::L2Squared));
  }
  return res;
}

FitDemoSetup fit_demo_setup(int points, std::uint64_t seed) {
  if (points < 1) throw InvalidArgument("fit_demo_setup: points must be positive");
  FitDemoSetup demo;
  Rng rng(seed);
  demo.start.resize(points);
  for (auto& p : demo.start) {
    p = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
  }
  demo.target.resize(points);
  const double golden = 3.14159265358979323846 * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < points; ++i) {
    const double z = 1.0 - 2.0 * (i + 0.5) / points;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double a = golden * i;
    demo.target[i] = {r * std::cos(a), r * std::sin(a), z};
  }
  return demo;
}

MetricReport evaluate_pair(const PointCloud& pred, const PointCloud& gt, bool want_cd_l1,
                           bool want_cd_l2, bool want_dcd, bool want_f1, double tau,
                           double alpha) {
  MetricReport rep;
  rep.tau = tau;
  rep.alpha = alpha;
  if (want_cd_l1) {
    const auto parts = chamfer_parts(pred, gt, ChamferVariant::L1Half);
    rep.cd_l1 = parts.value;
    rep.cd_l1_pred_to_gt = parts.forward_mean;
    rep.cd_l1_gt_to_pred = parts.backward_mean;
  }
  if (want_cd_l2) {
    const auto parts = chamfer_parts(pred, gt, ChamferVariant::L2Squared);
    rep.cd_l2 = parts.value;
    rep.cd_l2_pred_to_gt = parts.forward_mean;
    rep.cd_l2_gt_to_pred = parts.backward_mean;
  }
  if (want_dcd) rep.dcd = dcd(pred, gt, alpha);
  if (want_f1) rep.f1 = f1_score(pred, gt, tau);
  return rep;
}

}  // namespace pcfill
