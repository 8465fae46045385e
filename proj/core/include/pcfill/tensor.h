#pragma once

#include <vector>

namespace pcfill {

// Dense row-major matrix of double-precision features (N tokens x C
// channels). Weights are stored as float32 on disk; computation is done in
// double so algebraic identities asserted by the test suite hold to 1e-12.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(int rows, int cols)
      : rows_(rows), cols_(cols), v_(static_cast<std::size_t>(rows) * cols, 0.0) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool empty() const { return v_.empty(); }

  double& operator()(int r, int c) { return v_[static_cast<std::size_t>(r) * cols_ + c]; }
  double operator()(int r, int c) const { return v_[static_cast<std::size_t>(r) * cols_ + c]; }

  double* row(int r) { return v_.data() + static_cast<std::size_t>(r) * cols_; }
  const double* row(int r) const { return v_.data() + static_cast<std::size_t>(r) * cols_; }

  std::vector<double>& data() { return v_; }
  const std::vector<double>& data() const { return v_; }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> v_;
};

FeatureMatrix hconcat(const FeatureMatrix& a, const FeatureMatrix& b);

// Column-wise maximum over all rows (global max-pool over tokens).
std::vector<double> column_max(const FeatureMatrix& m);

bool all_finite(const FeatureMatrix& m);

}  // namespace pcfill
