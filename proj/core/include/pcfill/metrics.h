#pragma once

#include <cstddef>
#include <vector>

#include "pcfill/geometry.h"

namespace pcfill {

// Chamfer distance conventions. Eq5 is the canonical training loss: mean
// nearest-neighbor norm per direction, directions summed. L1Half is the
// benchmark "l1" value (Eq5 / 2); L2Squared uses squared norms (benchmark
// "l2").
enum class ChamferVariant { Eq5, L1Half, L2Squared };

struct ChamferParts {
  double forward_mean;   // mean over x of min_y
  double backward_mean;  // mean over y of min_x
  double value;
};

ChamferParts chamfer_parts(const PointCloud& x, const PointCloud& y, ChamferVariant variant);
double chamfer(const PointCloud& x, const PointCloud& y, ChamferVariant variant);

// Analytic gradient of chamfer(x, y, variant) with respect to x. At
// zero-distance pairs under a plain norm the subgradient 0 is returned;
// nearest-neighbor ties pick the lowest index.
std::vector<Vec3> chamfer_grad(const PointCloud& x, const PointCloud& y, ChamferVariant variant);

// Coarse-to-fine training loss: Eq5 chamfer of each prediction against the
// ground truth fps-downsampled to the prediction's size, summed.
double total_loss(const PointCloud& p_c, const PointCloud& p_1, const PointCloud& p_2,
                  const PointCloud& p_gt);

// Density-aware chamfer distance: per-point terms
// 1 - exp(-alpha*d^2)/n_match, where n_match counts how many same-side
// points chose that nearest neighbor; symmetric mean of both directions.
double dcd(const PointCloud& x, const PointCloud& y, double alpha = 1000.0);

// F-score at distance threshold tau (default 1% = 0.01).
double f1_score(const PointCloud& x, const PointCloud& y, double tau = 0.01);

struct MmdResult {
  double value;
  std::size_t best_index;
};

// Minimal matching distance: squared-norm chamfer against the closest
// gallery shape.
MmdResult mmd(const PointCloud& pred, const std::vector<PointCloud>& gallery);

struct FitResult {
  PointCloud cloud;
  std::vector<double> loss_curve;  // steps + 1 values, loss before each update and after the last
};

// Gradient descent on the squared-norm chamfer toward a fixed target.
FitResult toy_fit(const PointCloud& x0, const PointCloud& target, int steps, double lr);

struct FitDemoSetup {
  PointCloud start;   // seeded uniform points in [-1, 1]^3
  PointCloud target;  // Fibonacci sample of the unit sphere
};

// The bundled descent demo configuration.
FitDemoSetup fit_demo_setup(int points, std::uint64_t seed);

struct MetricReport {
  double cd_l1 = -1.0;
  double cd_l2 = -1.0;
  double dcd = -1.0;
  double f1 = -1.0;
  // Per-direction partial means of the chamfer values.
  double cd_l1_pred_to_gt = -1.0;
  double cd_l1_gt_to_pred = -1.0;
  double cd_l2_pred_to_gt = -1.0;
  double cd_l2_gt_to_pred = -1.0;
  double tau = 0.01;
  double alpha = 1000.0;
};

MetricReport evaluate_pair(const PointCloud& pred, const PointCloud& gt,
                           bool want_cd_l1, bool want_cd_l2, bool want_dcd, bool want_f1,
                           double tau = 0.01, double alpha = 1000.0);

}  // namespace pcfill
