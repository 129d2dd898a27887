#pragma once

#include "isplines/collocation.hpp"
#include "isplines/types.hpp"

#include <stdexcept>

namespace isplines {

/// Raised when the normal equations of a least-squares fit are singular.
class SingularSystemError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/**
 * Signed Euclidean distance in pixels from each pixel center to the nearest
 * pixel center of the opposite class: positive inside, negative outside.
 * A mask with only one class has no opposite pixels; every entry is then
 * +/- the image diagonal hypot(rows, cols).
 */
Field signed_distance(const BinaryMask& mask);

/// Clamps the field to [-tau, tau].
Field truncate_distance(const Field& sdf, double tau);

/// 1 everywhere, except `boost` where |sdf| <= radius (pixels near the zero set).
Matrix boundary_weights(const Field& sdf, double radius, double boost);

/**
 * Coefficients C minimising
 *   sum_ij W_ij (U C U^T - D)_ij^2 + ridge * ||C||_F^2
 * over the spline space of `collocation`.
 *
 * Uniform weights take the separable route: with G = U^T U the normal
 * equations G C G + ridge C = U^T D U diagonalise in G's eigenbasis.
 * Non-uniform weights assemble the sparse O^2 x O^2 normal matrix and
 * factor it with a sparse LDL^T.
 *
 * Throws SingularSystemError when ridge == 0 and the normal matrix is
 * singular (e.g. I < O); set ridge > 0 in that case.
 */
CoefficientGrid weighted_lsq_fit(const Field& target, const Matrix& weights,
                                 const CollocationMatrix& collocation, double ridge = 0.0);

/// Uniform-weight overload.
CoefficientGrid lsq_fit(const Field& target, const CollocationMatrix& collocation, double ridge = 0.0);

/// Objective value of weighted_lsq_fit at `coefficients`.
double lsq_objective(const Field& target, const Matrix& weights, const CollocationMatrix& collocation,
                     const Matrix& coefficients, double ridge);

}  // namespace isplines
