#include "sgood/tensor.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <utility>

namespace sgood {

Tensor::Tensor(int r, int c, double fill)
    : rows(r), cols(c), data(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), fill) {
  if (r < 0 || c < 0) throw std::invalid_argument("Tensor: negative shape");
}

Tensor Tensor::scalar(double v) {
  Tensor t(1, 1);
  t.data[0] = v;
  return t;
}

Tensor Tensor::row(std::vector<double> values) {
  Tensor t;
  t.rows = 1;
  t.cols = static_cast<int>(values.size());
  t.data = std::move(values);
  return t;
}

Tensor Tensor::from_rows(int r, int c, std::vector<double> values) {
  if (static_cast<std::size_t>(r) * static_cast<std::size_t>(c) != values.size()) {
    throw std::invalid_argument("Tensor::from_rows: value count does not match shape");
  }
  Tensor t;
  t.rows = r;
  t.cols = c;
  t.data = std::move(values);
  return t;
}

bool Tensor::all_finite() const {
  for (const double v : data) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("max_abs_diff: shape mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    m = std::max(m, std::abs(a.data[i] - b.data[i]));
  }
  return m;
}

}  // namespace sgood
