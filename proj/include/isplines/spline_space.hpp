#pragma once

#include <span>
#include <vector>

namespace isplines {

/// Open uniform knot sequence for `basis_count` B-splines of degree `degree`:
/// degree+1 zeros, the integers 1 .. basis_count-degree-1, then degree+1
/// copies of basis_count-degree. Throws std::invalid_argument when
/// basis_count < degree+1 or degree < 0.
std::vector<double> open_uniform_knots(int basis_count, int degree);

/**
 * Univariate B-spline space of degree p with O basis functions on the open
 * uniform knot vector. The parameter domain is [0, O-p].
 *
 * Basis functions are indexed from 0 (the first function is index 0, the
 * last is O-1). Support intervals are half-open [t_i, t_{i+p+1}) except at
 * the right end of the domain, which is assigned to the last non-empty knot
 * span so the last basis function evaluates to 1 at x = O-p.
 *
 * Evaluation uses the triangular de Boor table over the p+1 functions that
 * are active on the knot span containing x. That is the Cox-De Boor
 * recursion restricted to its nonzero terms, so no 0/0 quotient ever arises.
 */
class SplineSpace {
 public:
  SplineSpace(int basis_count, int degree);

  int degree() const { return degree_; }
  int basis_count() const { return basis_count_; }
  const std::vector<double>& knots() const { return knots_; }
  double domain_end() const { return static_cast<double>(basis_count_ - degree_); }
  bool contains(double x) const { return x >= 0.0 && x <= domain_end(); }

  /// Index mu of the knot span with t_mu <= x < t_{mu+1}, in [p, O-1].
  /// The right endpoint maps to O-1.
  int find_span(double x) const;

  /// Writes the p+1 basis values that may be nonzero at x into `values`
  /// (size must be degree()+1) and returns the index of the first one.
  int nonzero_basis(double x, std::span<double> values) const;

  /// B_index(x); zero outside the local support. Throws std::out_of_range
  /// for an index outside [0, O) or x outside the domain.
  double basis_value(int index, double x) const;

  /// Greville abscissa of basis function `index`: the average of its p
  /// interior knots (the support midpoint when p = 0).
  double greville(int index) const;

  bool operator==(const SplineSpace& other) const {
    return degree_ == other.degree_ && basis_count_ == other.basis_count_;
  }

 private:
  int basis_count_;
  int degree_;
  std::vector<double> knots_;
};

}  // namespace isplines
