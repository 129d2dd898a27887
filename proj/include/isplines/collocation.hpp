#pragma once

#include "isplines/spline_space.hpp"
#include "isplines/types.hpp"

#include <span>
#include <vector>

namespace isplines {

/**
 * I x O matrix of basis values at I uniform samples of the domain:
 * entry (i, k) = B_k(s_i) with s_i = (O-p) * i / (I-1), i = 0 .. I-1.
 *
 * Built once per (I, O, p) and shared read-only by every evaluation at that
 * resolution. Stored dense.
 */
class CollocationMatrix {
 public:
  /// Throws std::invalid_argument for sample_count < 2.
  CollocationMatrix(int sample_count, SplineSpace space);

  const Matrix& entries() const { return entries_; }
  const SplineSpace& space() const { return space_; }
  int sample_count() const { return sample_count_; }

  /// Parameter value of sample i.
  double sample(int i) const;

 private:
  int sample_count_;
  SplineSpace space_;
  Matrix entries_;
};

/// Parameter value of sample i out of `sample_count` uniform samples on [0, domain_end].
double sample_parameter(int i, int sample_count, const SplineSpace& space);

/// O x O control net of a bivariate spline. The first index runs along the
/// image's row axis (the x variable), the second along columns (y).
class CoefficientGrid {
 public:
  /// Throws std::invalid_argument if `values` is not O x O or holds a
  /// non-finite entry.
  CoefficientGrid(SplineSpace space, Matrix values);

  static CoefficientGrid constant(const SplineSpace& space, double value);
  static CoefficientGrid zeros(const SplineSpace& space) { return constant(space, 0.0); }

  const SplineSpace& space() const { return space_; }
  const Matrix& values() const { return values_; }
  int size() const { return space_.basis_count(); }

 private:
  SplineSpace space_;
  Matrix values_;
};

/// Z = U C U^T on the I x I sample grid, contracted one axis at a time
/// through an I x O intermediate.
Field evaluate_grid(const CollocationMatrix& collocation, const CoefficientGrid& coefficients);

/// Same contraction on a raw O x O array (used by the loss/optimizer path).
Field evaluate_grid(const CollocationMatrix& collocation, const Matrix& coefficients);

/// Evaluates a stack of grids, one grid per worker.
std::vector<Field> evaluate_batch(const CollocationMatrix& collocation,
                                  std::span<const CoefficientGrid> batch, int jobs = 1);

/// F(x, y) = sum_ij c_ij B_i(x) B_j(y), summing the (p+1)^2 locally
/// supported terms only. Throws std::out_of_range outside [0, O-p]^2.
double evaluate_point(const CoefficientGrid& coefficients, double x, double y);

}  // namespace isplines
