#include "isplines/optimizer.hpp"

#include "isplines/sdf_fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace isplines {

std::string_view to_string(InitMethod method) {
  switch (method) {
    case InitMethod::CoarseMask: return "coarse";
    case InitMethod::SdfLsq: return "sdf";
    case InitMethod::Zero: return "zero";
  }
  return "unknown";
}

std::optional<InitMethod> parse_init_method(std::string_view name) {
  for (auto m : {InitMethod::CoarseMask, InitMethod::SdfLsq, InitMethod::Zero}) {
    if (name == to_string(m)) return m;
  }
  return std::nullopt;
}

std::string_view to_string(StopReason reason) {
  return reason == StopReason::Plateau ? "plateau" : "max_iters";
}

void FitOptions::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw std::invalid_argument("learning rate must be > 0");
  }
  if (!(momentum >= 0.0 && momentum < 1.0)) throw std::invalid_argument("momentum must lie in [0, 1)");
  if (max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
  if (plateau_window < 1) throw std::invalid_argument("plateau window must be >= 1");
  if (!(plateau_tol >= 0.0)) throw std::invalid_argument("plateau tolerance must be >= 0");
}

namespace {

// Block index of every sample along one axis: nearest Greville abscissa.
std::vector<int> nearest_coefficient(const CollocationMatrix& collocation) {
  const SplineSpace& space = collocation.space();
  const int o = space.basis_count();
  std::vector<double> abscissae(static_cast<std::size_t>(o));
  for (int k = 0; k < o; ++k) abscissae[static_cast<std::size_t>(k)] = space.greville(k);

  std::vector<int> owner(static_cast<std::size_t>(collocation.sample_count()));
  int k = 0;
  for (int i = 0; i < collocation.sample_count(); ++i) {
    const double s = collocation.sample(i);
    while (k + 1 < o && std::abs(abscissae[static_cast<std::size_t>(k + 1)] - s) <
                            std::abs(abscissae[static_cast<std::size_t>(k)] - s)) {
      ++k;
    }
    owner[static_cast<std::size_t>(i)] = k;
  }
  return owner;
}

// Sample nearest to each Greville abscissa; fallback for empty blocks.
std::vector<int> nearest_sample(const CollocationMatrix& collocation) {
  const SplineSpace& space = collocation.space();
  const int n = collocation.sample_count();
  const double step = space.domain_end() / static_cast<double>(n - 1);
  std::vector<int> out(static_cast<std::size_t>(space.basis_count()));
  for (int k = 0; k < space.basis_count(); ++k) {
    const auto i = static_cast<int>(std::lround(space.greville(k) / step));
    out[static_cast<std::size_t>(k)] = std::clamp(i, 0, n - 1);
  }
  return out;
}

CoefficientGrid coarse_mask_init(const BinaryMask& mask, const CollocationMatrix& collocation) {
  const int o = collocation.space().basis_count();
  const auto owner = nearest_coefficient(collocation);
  Matrix sum = Matrix::Zero(o, o);
  Matrix count = Matrix::Zero(o, o);
  for (Eigen::Index i = 0; i < mask.rows(); ++i) {
    const int k = owner[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < mask.cols(); ++j) {
      const int l = owner[static_cast<std::size_t>(j)];
      sum(k, l) += mask(i, j);
      count(k, l) += 1.0;
    }
  }
  const auto fallback = nearest_sample(collocation);
  Matrix c(o, o);
  for (int k = 0; k < o; ++k) {
    for (int l = 0; l < o; ++l) {
      const double avg = count(k, l) > 0.0
                             ? sum(k, l) / count(k, l)
                             : mask(fallback[static_cast<std::size_t>(k)], fallback[static_cast<std::size_t>(l)]);
      c(k, l) = 2.0 * avg - 1.0;
    }
  }
  return {collocation.space(), std::move(c)};
}

}  // namespace

CoefficientGrid init_coefficients(const BinaryMask& mask, const CollocationMatrix& collocation,
                                  InitMethod method) {
  const int n = collocation.sample_count();
  if (mask.rows() != n || mask.cols() != n) {
    throw std::invalid_argument("mask must be " + std::to_string(n) + "x" + std::to_string(n));
  }
  switch (method) {
    case InitMethod::Zero:
      return CoefficientGrid::zeros(collocation.space());
    case InitMethod::CoarseMask:
      return coarse_mask_init(mask, collocation);
    case InitMethod::SdfLsq: {
      const double pixel_to_param = collocation.space().domain_end() / static_cast<double>(n - 1);
      return lsq_fit(signed_distance(mask) * pixel_to_param, collocation);
    }
  }
  throw std::invalid_argument("unknown init method");
}

FitResult fit_coefficients(const BinaryMask& mask, const CollocationMatrix& collocation,
                           const FitOptions& options) {
  options.validate();
  return fit_coefficients(mask, collocation, options, init_coefficients(mask, collocation, options.init));
}

FitResult fit_coefficients(const BinaryMask& mask, const CollocationMatrix& collocation,
                           const FitOptions& options, CoefficientGrid start) {
  options.validate();
  validate_mask(mask);
  if (!(start.space() == collocation.space())) {
    throw std::invalid_argument("starting grid and collocation matrix use different spline spaces");
  }

  Matrix c = start.values();
  Matrix velocity = Matrix::Zero(c.rows(), c.cols());
  Matrix best = c;
  double best_loss = std::numeric_limits<double>::infinity();
  int best_iteration = 0;

  FitResult result{std::move(start), {}, 0, 0, StopReason::MaxIters};
  result.loss_history.reserve(static_cast<std::size_t>(options.max_iters));
  std::vector<double> best_so_far;
  best_so_far.reserve(static_cast<std::size_t>(options.max_iters));

  for (int it = 0; it < options.max_iters; ++it) {
    const LossReport report = evaluate_loss(collocation, c, mask, options.loss, options.epsilon);
    if (!std::isfinite(report.loss)) {
      throw FitDivergedError("loss became non-finite at iteration " + std::to_string(it), it);
    }
    if (!report.grad_coefficients.allFinite()) {
      throw FitDivergedError("gradient became non-finite at iteration " + std::to_string(it), it);
    }
    result.loss_history.push_back(report.loss);
    if (report.loss < best_loss) {
      best_loss = report.loss;
      best = c;
      best_iteration = it;
    }
    best_so_far.push_back(best_loss);
    result.iterations_run = it + 1;

    if (it >= options.plateau_window &&
        best_so_far[static_cast<std::size_t>(it - options.plateau_window)] - best_loss < options.plateau_tol) {
      result.stop_reason = StopReason::Plateau;
      break;
    }
    if (it + 1 == options.max_iters) break;

    velocity = options.momentum * velocity + report.grad_coefficients;
    c -= options.learning_rate * (report.grad_coefficients + options.momentum * velocity);
  }

  result.coefficients = CoefficientGrid(collocation.space(), std::move(best));
  result.best_iteration = best_iteration;
  return result;
}

}  // namespace isplines
