#include "pcfill/tensor.h"

#include <cmath>
#include <string>

#include "pcfill/errors.h"

namespace pcfill {

FeatureMatrix hconcat(const FeatureMatrix& a, const FeatureMatrix& b) {
  if (a.rows() != b.rows()) {
    throw InvalidArgument("hconcat: row mismatch " + std::to_string(a.rows()) + " vs " +
                          std::to_string(b.rows()));
  }
  FeatureMatrix out(a.rows(), a.cols() + b.cols());
  for (int r = 0; r < a.rows(); ++r) {
    double* dst = out.row(r);
    const double* pa = a.row(r);
    const double* pb = b.row(r);
    for (int c = 0; c < a.cols(); ++c) dst[c] = pa[c];
    for (int c = 0; c < b.cols(); ++c) dst[a.cols() + c] = pb[c];
  }
  return out;
}

std::vector<double> column_max(const FeatureMatrix& m) {
  if (m.rows() == 0) throw InvalidArgument("column_max: empty matrix");
  std::vector<double> out(m.row(0), m.row(0) + m.cols());
  for (int r = 1; r < m.rows(); ++r) {
    const double* p = m.row(r);
    for (int c = 0; c < m.cols(); ++c) out[c] = std::max(out[c], p[c]);
  }
  return out;
}

bool all_finite(const FeatureMatrix& m) {
  for (double v : m.data()) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace pcfill
