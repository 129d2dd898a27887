#include "isplines/collocation.hpp"

#include "isplines/parallel.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace isplines {

double sample_parameter(int i, int sample_count, const SplineSpace& space) {
  if (i == sample_count - 1) return space.domain_end();
  return space.domain_end() * static_cast<double>(i) / static_cast<double>(sample_count - 1);
}

CollocationMatrix::CollocationMatrix(int sample_count, SplineSpace space)
    : sample_count_(sample_count), space_(std::move(space)) {
  if (sample_count < 2) {
    throw std::invalid_argument("collocation needs at least 2 samples (got I=" +
                                std::to_string(sample_count) + ")");
  }
  const int degree = space_.degree();
  entries_ = Matrix::Zero(sample_count, space_.basis_count());
  std::vector<double> values(static_cast<std::size_t>(degree + 1));
  for (int i = 0; i < sample_count; ++i) {
    const int first = space_.nonzero_basis(sample(i), values);
    for (int r = 0; r <= degree; ++r) entries_(i, first + r) = values[static_cast<std::size_t>(r)];
  }
}

double CollocationMatrix::sample(int i) const { return sample_parameter(i, sample_count_, space_); }

CoefficientGrid::CoefficientGrid(SplineSpace space, Matrix values)
    : space_(std::move(space)), values_(std::move(values)) {
  const int n = space_.basis_count();
  if (values_.rows() != n || values_.cols() != n) {
    throw std::invalid_argument("coefficient grid is " + std::to_string(values_.rows()) + "x" +
                                std::to_string(values_.cols()) + ", expected " +
                                std::to_string(n) + "x" + std::to_string(n));
  }
  if (!values_.allFinite()) throw std::invalid_argument("coefficient grid has non-finite entries");
}

CoefficientGrid CoefficientGrid::constant(const SplineSpace& space, double value) {
  return {space, Matrix::Constant(space.basis_count(), space.basis_count(), value)};
}

Field evaluate_grid(const CollocationMatrix& collocation, const Matrix& coefficients) {
  const Matrix& u = collocation.entries();
  if (coefficients.rows() != u.cols() || coefficients.cols() != u.cols()) {
    throw std::invalid_argument("coefficient grid does not match collocation basis count " +
                                std::to_string(u.cols()));
  }
  // Ztilde_il = sum_k U_ik C_kl, then Z_ij = sum_l U_jl Ztilde_il
  const Matrix partial = u * coefficients;
  return partial * u.transpose();
}

Field evaluate_grid(const CollocationMatrix& collocation, const CoefficientGrid& coefficients) {
  if (!(collocation.space() == coefficients.space())) {
    throw std::invalid_argument("coefficient grid and collocation matrix use different spline spaces");
  }
  return evaluate_grid(collocation, coefficients.values());
}

std::vector<Field> evaluate_batch(const CollocationMatrix& collocation,
                                  std::span<const CoefficientGrid> batch, int jobs) {
  std::vector<Field> out(batch.size());
  parallel_for(batch.size(), jobs, [&](std::size_t m) { out[m] = evaluate_grid(collocation, batch[m]); });
  return out;
}

double evaluate_point(const CoefficientGrid& coefficients, double x, double y) {
  const SplineSpace& space = coefficients.space();
  const auto n = static_cast<std::size_t>(space.degree() + 1);
  std::vector<double> bx(n);
  std::vector<double> by(n);
  const int fx = space.nonzero_basis(x, bx);
  const int fy = space.nonzero_basis(y, by);
  const Matrix& c = coefficients.values();
  double sum = 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    double row = 0.0;
    for (std::size_t b = 0; b < n; ++b) row += c(fx + static_cast<int>(a), fy + static_cast<int>(b)) * by[b];
    sum += bx[a] * row;
  }
  return sum;
}

}  // namespace isplines
