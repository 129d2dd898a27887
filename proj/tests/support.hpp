// Test-only oracles and fixtures. Nothing here calls into the code paths it
// is used to check.
#pragma once

#include "isplines/types.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <utility>
#include <vector>

namespace isplines::testing {

// ---------------------------------------------------------------------------
// Spline oracles

inline std::vector<double> knots_by_formula(int o, int p) {
  std::vector<double> t;
  for (int k = 0; k <= p; ++k) t.push_back(0.0);
  for (int k = 1; k <= o - p - 1; ++k) t.push_back(k);
  for (int k = 0; k <= p; ++k) t.push_back(o - p);
  return t;
}

/// Textbook Cox-De Boor recursion with 0/0 := 0 (0-based index i). The last
/// non-empty interval is closed on the right so the domain end is covered.
template <typename Real = double>
Real cox_de_boor(const std::vector<double>& t, int i, int p, Real x) {
  const auto ti = [&](int k) { return static_cast<Real>(t[static_cast<std::size_t>(k)]); };
  if (p == 0) {
    const Real end = static_cast<Real>(t.back());
    if (ti(i) <= x && x < ti(i + 1)) return 1;
    if (x == end && ti(i) < ti(i + 1) && ti(i + 1) == end) return 1;
    return 0;
  }
  Real left = 0;
  Real right = 0;
  const Real d1 = ti(i + p) - ti(i);
  const Real d2 = ti(i + p + 1) - ti(i + 1);
  if (d1 != 0) left = (x - ti(i)) / d1 * cox_de_boor<Real>(t, i, p - 1, x);
  if (d2 != 0) right = (ti(i + p + 1) - x) / d2 * cox_de_boor<Real>(t, i + 1, p - 1, x);
  return left + right;
}

/// Spline value by the defining double sum, every basis function evaluated
/// with the recursion above.
template <typename Real = double>
Real spline_by_definition(const Matrix& c, int p, Real x, Real y) {
  const int o = static_cast<int>(c.rows());
  const auto t = knots_by_formula(o, p);
  std::vector<Real> bx(static_cast<std::size_t>(o));
  std::vector<Real> by(static_cast<std::size_t>(o));
  for (int k = 0; k < o; ++k) {
    bx[static_cast<std::size_t>(k)] = cox_de_boor<Real>(t, k, p, x);
    by[static_cast<std::size_t>(k)] = cox_de_boor<Real>(t, k, p, y);
  }
  Real sum = 0;
  for (int k = 0; k < o; ++k) {
    for (int l = 0; l < o; ++l) sum += static_cast<Real>(c(k, l)) * bx[static_cast<std::size_t>(k)] * by[static_cast<std::size_t>(l)];
  }
  return sum;
}

// ---------------------------------------------------------------------------
// Long-double loss oracle for finite differences

enum class OracleLoss { MMAE, MMSE, Accuracy, Dice, Jaccard };

/// Collocation values B_k(s_i) in long double via the recursion.
inline std::vector<std::vector<long double>> oracle_collocation(int samples, int o, int p) {
  const auto t = knots_by_formula(o, p);
  std::vector<std::vector<long double>> u(static_cast<std::size_t>(samples), std::vector<long double>(static_cast<std::size_t>(o)));
  for (int i = 0; i < samples; ++i) {
    const long double s = (i == samples - 1) ? static_cast<long double>(o - p)
                                             : static_cast<long double>(o - p) * i / (samples - 1);
    for (int k = 0; k < o; ++k) u[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] = cox_de_boor<long double>(t, k, p, s);
  }
  return u;
}

inline long double oracle_loss(const std::vector<std::vector<long double>>& u, const std::vector<long double>& c,
                               int o, const BinaryMask& y, OracleLoss kind, long double eps) {
  const int n = static_cast<int>(u.size());
  long double sum_abs = 0, sum_sq = 0, sy = 0, sz = 0, syz = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      long double z = 0;
      for (int k = 0; k < o; ++k) {
        const long double uik = u[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
        if (uik == 0) continue;
        for (int l = 0; l < o; ++l) z += uik * c[static_cast<std::size_t>(k * o + l)] * u[static_cast<std::size_t>(j)][static_cast<std::size_t>(l)];
      }
      const long double yy = y(i, j);
      const long double yhat = 2 * yy - 1;
      sum_abs += std::fabs(z - yhat);
      sum_sq += (z - yhat) * (z - yhat);
      const long double zh = 0.5L * (z / (eps + std::fabs(z)) + 1);
      sy += yy;
      sz += zh;
      syz += yy * zh;
    }
  }
  const long double count = static_cast<long double>(n) * n;
  switch (kind) {
    case OracleLoss::MMAE: return sum_abs / count;
    case OracleLoss::MMSE: return sum_sq / count;
    case OracleLoss::Accuracy: return 1 - (count - sy - sz + 2 * syz) / count;
    case OracleLoss::Dice: return 1 - 2 * syz / (sy + sz);
    case OracleLoss::Jaccard: return 1 - syz / (sy + sz - syz);
  }
  return 0;
}

/// Central differences of the oracle loss with respect to every coefficient.
inline Matrix fd_gradient(const Matrix& c, int p, const BinaryMask& y, OracleLoss kind, double eps, double h) {
  const int o = static_cast<int>(c.rows());
  const auto u = oracle_collocation(static_cast<int>(y.rows()), o, p);
  std::vector<long double> flat(static_cast<std::size_t>(o * o));
  for (int k = 0; k < o * o; ++k) flat[static_cast<std::size_t>(k)] = c.data()[k];
  Matrix g(o, o);
  for (int k = 0; k < o * o; ++k) {
    const long double base = flat[static_cast<std::size_t>(k)];
    flat[static_cast<std::size_t>(k)] = base + h;
    const long double up = oracle_loss(u, flat, o, y, kind, eps);
    flat[static_cast<std::size_t>(k)] = base - h;
    const long double down = oracle_loss(u, flat, o, y, kind, eps);
    flat[static_cast<std::size_t>(k)] = base;
    g.data()[k] = static_cast<double>((up - down) / (2.0L * h));
  }
  return g;
}

/// max_k |a_k - f_k| / max(|a_k|, |f_k|, floor * max|f|).
inline double max_relative_error(const Matrix& analytic, const Matrix& fd, double floor_fraction = 1e-3) {
  const double scale = floor_fraction * fd.cwiseAbs().maxCoeff();
  double worst = 0.0;
  for (Eigen::Index k = 0; k < fd.size(); ++k) {
    const double a = analytic.data()[k];
    const double f = fd.data()[k];
    const double denom = std::max({std::abs(a), std::abs(f), scale, std::numeric_limits<double>::min()});
    worst = std::max(worst, std::abs(a - f) / denom);
  }
  return worst;
}

/// Field U C U^T from oracle collocation values, in double.
inline Matrix oracle_field(const std::vector<std::vector<long double>>& u, const Matrix& c) {
  const int n = static_cast<int>(u.size());
  const int o = static_cast<int>(c.rows());
  Matrix z = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      long double acc = 0;
      for (int k = 0; k < o; ++k)
        for (int l = 0; l < o; ++l)
          acc += u[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] * c(k, l) *
                 u[static_cast<std::size_t>(j)][static_cast<std::size_t>(l)];
      z(i, j) = static_cast<double>(acc);
    }
  return z;
}

struct GradientInstance {
  Matrix c;
  BinaryMask y;
};

/// Random (C, Y) for gradient checks. Coefficients have random sign and
/// magnitude in [2, 6]; draws whose field comes within `min_abs` of zero are
/// rejected, since there the smoothed indicator's curvature (~1/eps^2) swamps
/// central differences. With `avoid_kinks`, draws where |Z - (2Y-1)| < 1e-3
/// are rejected too (MMAE is not differentiable there).
inline GradientInstance gradient_instance(std::mt19937_64& rng, int o, int p, int samples, bool avoid_kinks,
                                          double min_abs = 0.02) {
  const auto u = oracle_collocation(samples, o, p);
  std::uniform_real_distribution<double> mag(2.0, 6.0);
  std::bernoulli_distribution coin(0.5);
  for (;;) {
    Matrix c(o, o);
    for (Eigen::Index k = 0; k < c.size(); ++k) c.data()[k] = (coin(rng) ? 1.0 : -1.0) * mag(rng);
    const Matrix z = oracle_field(u, c);
    if (z.cwiseAbs().minCoeff() < min_abs) continue;
    BinaryMask y(samples, samples);
    for (Eigen::Index k = 0; k < y.size(); ++k) y.data()[k] = coin(rng) ? 1 : 0;
    if (avoid_kinks) {
      bool near = false;
      for (Eigen::Index k = 0; k < z.size() && !near; ++k)
        near = std::abs(z.data()[k] - (2.0 * y.data()[k] - 1.0)) < 1e-3;
      if (near) continue;
    }
    return {c, y};
  }
}

// ---------------------------------------------------------------------------
// Distance oracles

using Point = std::array<int, 3>;

inline double brute_directed(const std::vector<Point>& a, const std::vector<Point>& b,
                             std::array<double, 3> s = {1, 1, 1}) {
  double worst = 0.0;
  for (const auto& p : a) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& q : b) {
      const double dx = (p[0] - q[0]) * s[0], dy = (p[1] - q[1]) * s[1], dz = (p[2] - q[2]) * s[2];
      best = std::min(best, dx * dx + dy * dy + dz * dz);
    }
    worst = std::max(worst, best);
  }
  return std::sqrt(worst);
}

inline double brute_hausdorff(const std::vector<Point>& a, const std::vector<Point>& b,
                              std::array<double, 3> s = {1, 1, 1}) {
  return std::max(brute_directed(a, b, s), brute_directed(b, a, s));
}

/// Signed distance by exhaustive nearest-opposite search.
inline Matrix brute_sdf(const BinaryMask& m) {
  Matrix out(m.rows(), m.cols());
  const double cap = std::hypot(static_cast<double>(m.rows()), static_cast<double>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      double best = std::numeric_limits<double>::infinity();
      for (Eigen::Index a = 0; a < m.rows(); ++a) {
        for (Eigen::Index b = 0; b < m.cols(); ++b) {
          if ((m(a, b) != 0) == (m(i, j) != 0)) continue;
          const double di = static_cast<double>(i - a), dj = static_cast<double>(j - b);
          best = std::min(best, di * di + dj * dj);
        }
      }
      const double mag = std::isinf(best) ? cap : std::sqrt(best);
      out(i, j) = m(i, j) ? mag : -mag;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Topology oracle

/// Number of 4-connected components of pixels equal to `value`.
inline int count_components(const BinaryMask& m, std::uint8_t value = 1) {
  const auto rows = m.rows(), cols = m.cols();
  std::vector<char> seen(static_cast<std::size_t>(rows * cols), 0);
  int count = 0;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> stack;
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      if ((m(i, j) != 0) != (value != 0) || seen[static_cast<std::size_t>(i * cols + j)]) continue;
      ++count;
      stack.push_back({i, j});
      seen[static_cast<std::size_t>(i * cols + j)] = 1;
      while (!stack.empty()) {
        auto [a, b] = stack.back();
        stack.pop_back();
        const std::pair<Eigen::Index, Eigen::Index> nbrs[4] = {{a - 1, b}, {a + 1, b}, {a, b - 1}, {a, b + 1}};
        for (auto [x, y] : nbrs) {
          if (x < 0 || y < 0 || x >= rows || y >= cols) continue;
          if ((m(x, y) != 0) != (value != 0) || seen[static_cast<std::size_t>(x * cols + y)]) continue;
          seen[static_cast<std::size_t>(x * cols + y)] = 1;
          stack.push_back({x, y});
        }
      }
    }
  }
  return count;
}

// ---------------------------------------------------------------------------
// Shape fixtures

inline BinaryMask disk_mask(int n, double row, double col, double radius) {
  BinaryMask m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = std::hypot(i - row, j - col) <= radius ? 1 : 0;
  return m;
}

/// Centered disk of radius n/4.
inline BinaryMask centered_disk(int n) { return disk_mask(n, (n - 1) / 2.0, (n - 1) / 2.0, n / 4.0); }

/// Centered annulus with radii (0.172 n, 0.344 n): 22 and 44 pixels at n = 128.
inline BinaryMask annulus_mask(int n) {
  BinaryMask m(n, n);
  const double c = (n - 1) / 2.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double r = std::hypot(i - c, j - c);
      m(i, j) = (r >= 0.171875 * n && r <= 0.34375 * n) ? 1 : 0;
    }
  }
  return m;
}

/// Two disjoint disks.
inline BinaryMask two_blobs_mask(int n) {
  const double s = n / 128.0;
  BinaryMask a = disk_mask(n, 40 * s, 40 * s, 22 * s);
  BinaryMask b = disk_mask(n, 88 * s, 86 * s, 20 * s);
  return a.cwiseMax(b);
}

inline BinaryMask random_mask(std::mt19937_64& rng, int rows, int cols, double density = 0.5) {
  std::bernoulli_distribution coin(density);
  BinaryMask m(rows, cols);
  for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = coin(rng) ? 1 : 0;
  return m;
}

inline Matrix random_matrix(std::mt19937_64& rng, int rows, int cols, double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Matrix m(rows, cols);
  for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = dist(rng);
  return m;
}

}  // namespace isplines::testing
