#include "isplines/spline_space.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace isplines {

std::vector<double> open_uniform_knots(int basis_count, int degree) {
  if (degree < 0) {
    throw std::invalid_argument("degree must be non-negative (got p=" + std::to_string(degree) + ")");
  }
  if (basis_count < degree + 1) {
    throw std::invalid_argument("O must be ≥ p+1 (got O=" + std::to_string(basis_count) +
                                ", p=" + std::to_string(degree) + ")");
  }
  const int interior = basis_count - degree - 1;
  std::vector<double> knots;
  knots.reserve(static_cast<std::size_t>(basis_count + degree + 1));
  knots.insert(knots.end(), static_cast<std::size_t>(degree + 1), 0.0);
  for (int k = 1; k <= interior; ++k) knots.push_back(static_cast<double>(k));
  knots.insert(knots.end(), static_cast<std::size_t>(degree + 1),
               static_cast<double>(basis_count - degree));
  return knots;
}

SplineSpace::SplineSpace(int basis_count, int degree)
    : basis_count_(basis_count), degree_(degree), knots_(open_uniform_knots(basis_count, degree)) {}

int SplineSpace::find_span(double x) const {
  if (!contains(x)) {
    throw std::out_of_range("spline parameter " + std::to_string(x) + " outside [0, " +
                            std::to_string(domain_end()) + "]");
  }
  const auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
  const int span = static_cast<int>(it - knots_.begin()) - 1;
  return std::clamp(span, degree_, basis_count_ - 1);
}

int SplineSpace::nonzero_basis(double x, std::span<double> values) const {
  if (values.size() != static_cast<std::size_t>(degree_ + 1)) {
    throw std::invalid_argument("nonzero_basis: output must hold degree+1 values");
  }
  const int span = find_span(x);
  // left[j] = x - t[span+1-j], right[j] = t[span+j] - x
  constexpr int kStackDegree = 16;
  double left_buf[kStackDegree + 1];
  double right_buf[kStackDegree + 1];
  std::vector<double> heap;
  double* left = left_buf;
  double* right = right_buf;
  if (degree_ > kStackDegree) {
    heap.resize(2 * static_cast<std::size_t>(degree_ + 1));
    left = heap.data();
    right = heap.data() + degree_ + 1;
  }

  values[0] = 1.0;
  for (int j = 1; j <= degree_; ++j) {
    left[j] = x - knots_[static_cast<std::size_t>(span + 1 - j)];
    right[j] = knots_[static_cast<std::size_t>(span + j)] - x;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double temp = values[static_cast<std::size_t>(r)] / (right[r + 1] + left[j - r]);
      values[static_cast<std::size_t>(r)] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    values[static_cast<std::size_t>(j)] = saved;
  }
  return span - degree_;
}

double SplineSpace::basis_value(int index, double x) const {
  if (index < 0 || index >= basis_count_) {
    throw std::out_of_range("basis index " + std::to_string(index) + " outside [0, " +
                            std::to_string(basis_count_) + ")");
  }
  std::vector<double> values(static_cast<std::size_t>(degree_ + 1));
  const int first = nonzero_basis(x, values);
  const int offset = index - first;
  if (offset < 0 || offset > degree_) return 0.0;
  return values[static_cast<std::size_t>(offset)];
}

double SplineSpace::greville(int index) const {
  if (index < 0 || index >= basis_count_) {
    throw std::out_of_range("basis index " + std::to_string(index) + " outside [0, " +
                            std::to_string(basis_count_) + ")");
  }
  const auto i = static_cast<std::size_t>(index);
  if (degree_ == 0) return 0.5 * (knots_[i] + knots_[i + 1]);
  double sum = 0.0;
  for (int k = 1; k <= degree_; ++k) sum += knots_[i + static_cast<std::size_t>(k)];
  return sum / degree_;
}

}  // namespace isplines
