#pragma once

#include "isplines/collocation.hpp"
#include "isplines/losses.hpp"
#include "isplines/types.hpp"

#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace isplines {

enum class InitMethod { CoarseMask, SdfLsq, Zero };

std::string_view to_string(InitMethod method);
/// Accepts the CLI names: coarse, sdf, zero.
std::optional<InitMethod> parse_init_method(std::string_view name);

struct FitOptions {
  LossKind loss = LossKind::Dice;
  double learning_rate = 0.001;
  double momentum = 0.9;
  int max_iters = 2000;
  double epsilon = kDefaultEpsilon;
  InitMethod init = InitMethod::CoarseMask;
  double plateau_tol = 1e-7;
  int plateau_window = 50;

  /// Throws std::invalid_argument on out-of-range settings.
  void validate() const;
};

enum class StopReason { MaxIters, Plateau };

std::string_view to_string(StopReason reason);

struct FitResult {
  CoefficientGrid coefficients;
  std::vector<double> loss_history;
  int iterations_run = 0;
  int best_iteration = 0;
  StopReason stop_reason = StopReason::MaxIters;
};

/// Raised when the loss or its gradient stops being finite during a fit.
class FitDivergedError : public std::runtime_error {
 public:
  FitDivergedError(const std::string& what, int iteration)
      : std::runtime_error(what), iteration_(iteration) {}
  int iteration() const { return iteration_; }

 private:
  int iteration_;
};

/**
 * Starting coefficients for a direct fit.
 *
 * - Zero: all zeros.
 * - CoarseMask: every pixel is assigned to the coefficient whose Greville
 *   abscissa is nearest its sample parameter (per axis); each coefficient
 *   becomes 2 * mean(Y over its block) - 1. A block without pixels (only
 *   possible when I < O) takes the nearest pixel's value.
 * - SdfLsq: least-squares fit (unit weights, no ridge) of the mask's signed
 *   distance field, rescaled from pixels to spline parameter units.
 */
CoefficientGrid init_coefficients(const BinaryMask& mask, const CollocationMatrix& collocation,
                                  InitMethod method);

/**
 * Fits coefficients to `mask` by full-batch gradient descent with Nesterov
 * momentum on the chosen loss. The update is
 *
 *   g_t = dL/dC (C_t)
 *   v_{t+1} = mu v_t + g_t
 *   C_{t+1} = C_t - lr (g_t + mu v_{t+1})
 *
 * loss_history[t] is L(C_t). Stops after max_iters evaluations, or once the
 * best loss has improved by less than plateau_tol over the last
 * plateau_window evaluations. Returns the best iterate seen.
 *
 * Throws FitDivergedError (with the iteration index) on a non-finite loss
 * or gradient.
 */
FitResult fit_coefficients(const BinaryMask& mask, const CollocationMatrix& collocation,
                           const FitOptions& options);

/// Same, from an explicit starting grid (options.init is ignored).
FitResult fit_coefficients(const BinaryMask& mask, const CollocationMatrix& collocation,
                           const FitOptions& options, CoefficientGrid start);

}  // namespace isplines
