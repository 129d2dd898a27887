#include "isplines/sdf_fit.hpp"

#include "isplines/distance_transform.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace isplines {
namespace {

constexpr double kSingularTol = 1e-12;

void check_target(const Field& target, const CollocationMatrix& collocation) {
  const int n = collocation.sample_count();
  if (target.rows() != n || target.cols() != n) {
    throw std::invalid_argument("target is " + std::to_string(target.rows()) + "x" +
                                std::to_string(target.cols()) + ", collocation expects " +
                                std::to_string(n) + "x" + std::to_string(n));
  }
  if (!target.allFinite()) throw std::invalid_argument("target field has non-finite entries");
}

[[noreturn]] void throw_singular() {
  throw SingularSystemError(
      "least-squares normal matrix is singular (too few samples per basis function?); "
      "set ridge > 0 to regularise the fit");
}

CoefficientGrid separable_fit(const Field& target, const CollocationMatrix& collocation, double ridge) {
  const Matrix& u = collocation.entries();
  const Eigen::MatrixXd gram = u.transpose() * u;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  if (eig.info() != Eigen::Success) throw_singular();
  const Eigen::VectorXd& lambda = eig.eigenvalues();
  const Eigen::MatrixXd& q = eig.eigenvectors();
  if (ridge == 0.0 && lambda.minCoeff() <= kSingularTol * lambda.maxCoeff()) throw_singular();

  const Eigen::MatrixXd rhs = u.transpose() * target * u;
  Eigen::MatrixXd rotated = q.transpose() * rhs * q;
  for (Eigen::Index k = 0; k < rotated.rows(); ++k) {
    for (Eigen::Index l = 0; l < rotated.cols(); ++l) rotated(k, l) /= lambda(k) * lambda(l) + ridge;
  }
  Matrix c = q * rotated * q.transpose();
  return {collocation.space(), std::move(c)};
}

CoefficientGrid sparse_fit(const Field& target, const Matrix& weights, const CollocationMatrix& collocation,
                           double ridge) {
  const SplineSpace& space = collocation.space();
  const int o = space.basis_count();
  const int p = space.degree();
  const int samples = collocation.sample_count();
  const Matrix& u = collocation.entries();

  std::vector<int> first(static_cast<std::size_t>(samples));
  {
    std::vector<double> scratch(static_cast<std::size_t>(p + 1));
    for (int i = 0; i < samples; ++i) {
      first[static_cast<std::size_t>(i)] = space.nonzero_basis(collocation.sample(i), scratch);
    }
  }

  // rows[k][d][j] = sum_i W_ij U_ik U_i,k+d  for d in [0, p]
  const auto band = static_cast<std::size_t>(p + 1);
  std::vector<double> rows(static_cast<std::size_t>(o) * band * static_cast<std::size_t>(samples), 0.0);
  auto row_at = [&](int k, int d, int j) -> double& {
    return rows[(static_cast<std::size_t>(k) * band + static_cast<std::size_t>(d)) * static_cast<std::size_t>(samples) +
                static_cast<std::size_t>(j)];
  };
  for (int i = 0; i < samples; ++i) {
    const int k0 = first[static_cast<std::size_t>(i)];
    for (int a = 0; a <= p; ++a) {
      for (int b = a; b <= p; ++b) {
        const double uu = u(i, k0 + a) * u(i, k0 + b);
        if (uu == 0.0) continue;
        for (int j = 0; j < samples; ++j) row_at(k0 + a, b - a, j) += uu * weights(i, j);
      }
    }
  }

  using Triplet = Eigen::Triplet<double>;
  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(o) * band * static_cast<std::size_t>(samples) * band * band * 2);
  auto flat = [o](int k, int l) { return k * o + l; };
  for (int k = 0; k < o; ++k) {
    for (int d = 0; d <= p && k + d < o; ++d) {
      for (int j = 0; j < samples; ++j) {
        const double rk = row_at(k, d, j);
        if (rk == 0.0) continue;
        const int l0 = first[static_cast<std::size_t>(j)];
        for (int a = 0; a <= p; ++a) {
          for (int b = 0; b <= p; ++b) {
            const double v = rk * u(j, l0 + a) * u(j, l0 + b);
            if (v == 0.0) continue;
            triplets.emplace_back(flat(k, l0 + a), flat(k + d, l0 + b), v);
            if (d != 0) triplets.emplace_back(flat(k + d, l0 + b), flat(k, l0 + a), v);
          }
        }
      }
    }
  }
  const int n = o * o;
  for (int k = 0; k < n; ++k) triplets.emplace_back(k, k, ridge);

  Eigen::SparseMatrix<double> normal(n, n);
  normal.setFromTriplets(triplets.begin(), triplets.end());

  const Matrix weighted = weights.cwiseProduct(target);
  const Matrix rhs_grid = u.transpose() * weighted * u;
  const Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(rhs_grid.data(), n);

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
  solver.compute(normal);
  if (solver.info() != Eigen::Success) throw_singular();
  const Eigen::VectorXd diag = solver.vectorD();
  if (diag.minCoeff() <= kSingularTol * diag.cwiseAbs().maxCoeff()) throw_singular();
  const Eigen::VectorXd x = solver.solve(rhs);
  if (solver.info() != Eigen::Success || !x.allFinite()) throw_singular();

  Matrix c = Eigen::Map<const Matrix>(x.data(), o, o);
  return {space, std::move(c)};
}

}  // namespace

Field signed_distance(const BinaryMask& mask) {
  const auto rows = static_cast<std::size_t>(mask.rows());
  const auto cols = static_cast<std::size_t>(mask.cols());
  const std::size_t total = rows * cols;
  std::vector<std::uint8_t> inside(mask.data(), mask.data() + total);
  std::vector<std::uint8_t> outside(total);
  for (std::size_t k = 0; k < total; ++k) {
    inside[k] = inside[k] ? 1 : 0;
    outside[k] = inside[k] ? 0 : 1;
  }
  const GridShape shape = {1, rows, cols};
  const auto to_outside = squared_distance_transform(outside, shape);
  const auto to_inside = squared_distance_transform(inside, shape);
  const double cap = std::hypot(static_cast<double>(rows), static_cast<double>(cols));

  Field out(mask.rows(), mask.cols());
  for (std::size_t k = 0; k < total; ++k) {
    if (inside[k]) {
      out.data()[k] = std::isinf(to_outside[k]) ? cap : std::sqrt(to_outside[k]);
    } else {
      out.data()[k] = std::isinf(to_inside[k]) ? -cap : -std::sqrt(to_inside[k]);
    }
  }
  return out;
}

Field truncate_distance(const Field& sdf, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("truncation distance must be > 0");
  return sdf.cwiseMax(-tau).cwiseMin(tau);
}

Matrix boundary_weights(const Field& sdf, double radius, double boost) {
  if (!(radius >= 0.0) || !(boost > 0.0)) {
    throw std::invalid_argument("boundary weights need radius >= 0 and boost > 0");
  }
  return sdf.unaryExpr([radius, boost](double d) { return std::abs(d) <= radius ? boost : 1.0; });
}

CoefficientGrid weighted_lsq_fit(const Field& target, const Matrix& weights,
                                 const CollocationMatrix& collocation, double ridge) {
  check_target(target, collocation);
  if (weights.rows() != target.rows() || weights.cols() != target.cols()) {
    throw std::invalid_argument("weight grid shape does not match the target");
  }
  if (!(ridge >= 0.0) || !std::isfinite(ridge)) throw std::invalid_argument("ridge must be >= 0");
  if (!weights.allFinite() || weights.minCoeff() < 0.0) throw std::invalid_argument("weights must be finite and >= 0");
  const double w_max = weights.maxCoeff();
  if (w_max <= 0.0) throw std::invalid_argument("weights must not all be zero");

  if (weights.minCoeff() == w_max) return separable_fit(target, collocation, ridge / w_max);
  return sparse_fit(target, weights, collocation, ridge);
}

CoefficientGrid lsq_fit(const Field& target, const CollocationMatrix& collocation, double ridge) {
  check_target(target, collocation);
  if (!(ridge >= 0.0) || !std::isfinite(ridge)) throw std::invalid_argument("ridge must be >= 0");
  return separable_fit(target, collocation, ridge);
}

double lsq_objective(const Field& target, const Matrix& weights, const CollocationMatrix& collocation,
                     const Matrix& coefficients, double ridge) {
  const Field residual = evaluate_grid(collocation, coefficients) - target;
  return weights.cwiseProduct(residual.cwiseAbs2()).sum() + ridge * coefficients.squaredNorm();
}

}  // namespace isplines
