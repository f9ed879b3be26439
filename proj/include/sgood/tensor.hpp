#pragma once

#include <vector>

namespace sgood {

// Dense row-major matrix of doubles. Scalars are 1x1, row vectors 1xN.
struct Tensor {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Tensor() = default;
  Tensor(int r, int c, double fill = 0.0);

  static Tensor scalar(double v);
  static Tensor row(std::vector<double> values);
  static Tensor from_rows(int r, int c, std::vector<double> values);

  double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }

  int size() const { return rows * cols; }
  bool same_shape(const Tensor& o) const { return rows == o.rows && cols == o.cols; }
  bool all_finite() const;

  bool operator==(const Tensor&) const = default;
};

double max_abs_diff(const Tensor& a, const Tensor& b);

}  // namespace sgood
