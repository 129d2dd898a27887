#pragma once

#include "isplines/collocation.hpp"
#include "isplines/types.hpp"

#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace isplines {

enum class LossKind { MMAE, MMSE, Accuracy, Dice, Jaccard };

inline constexpr double kDefaultEpsilon = 1e-4;

std::string_view to_string(LossKind kind);
/// Accepts the lowercase CLI names: mmae, mmse, accuracy, dice, jaccard.
std::optional<LossKind> parse_loss_kind(std::string_view name);

/// Throws std::invalid_argument unless every entry is 0 or 1.
void validate_mask(const BinaryMask& mask);

/// 2Y - 1, mapping {0, 1} to {-1, +1}.
Matrix signed_mask(const BinaryMask& mask);

/// 0.5 * (z / (eps + |z|) + 1), strictly inside (0, 1) and increasing in z.
double smooth_indicator(double z, double epsilon);
/// d/dz of smooth_indicator: eps / (2 (eps + |z|)^2).
double smooth_indicator_derivative(double z, double epsilon);
Matrix smooth_indicator(const Field& z, double epsilon);

/// Loss value and its gradient with respect to the evaluated field Z.
struct FieldLoss {
  double value = 0.0;
  Matrix grad;
};

/// mean |Z - (2Y-1)|; subgradient sign(Z - Yhat) / N with sign(0) = 0.
FieldLoss loss_mmae(const Field& z, const BinaryMask& mask);
/// mean (Z - (2Y-1))^2.
FieldLoss loss_mmse(const Field& z, const BinaryMask& mask);
/// Soft Accuracy / Dice / Jaccard loss on the smoothed indicator of Z.
FieldLoss loss_region(const Field& z, const BinaryMask& mask, LossKind kind,
                      double epsilon = kDefaultEpsilon);
/// Dispatches on `kind`; epsilon is ignored by MMAE/MMSE.
FieldLoss field_loss(const Field& z, const BinaryMask& mask, LossKind kind,
                     double epsilon = kDefaultEpsilon);

/// Adjoint of evaluate_grid: U^T G U, in two stages.
Matrix backprop_to_coefficients(const Matrix& grad_field, const CollocationMatrix& collocation);

struct LossReport {
  double loss = 0.0;
  Matrix grad_coefficients;
  LossKind kind = LossKind::Dice;
};

/// Evaluates the coefficients on the collocation grid, applies the loss and
/// pulls the gradient back to the coefficients.
LossReport evaluate_loss(const CollocationMatrix& collocation, const Matrix& coefficients,
                         const BinaryMask& mask, LossKind kind, double epsilon = kDefaultEpsilon);
LossReport evaluate_loss(const CollocationMatrix& collocation, const CoefficientGrid& coefficients,
                         const BinaryMask& mask, LossKind kind, double epsilon = kDefaultEpsilon);

struct BatchLossReport {
  double loss = 0.0;
  std::vector<Matrix> grad_coefficients;
  LossKind kind = LossKind::Dice;
};

/// Batch loss is the mean of slice losses; gradients are scaled by 1/B to
/// match.
BatchLossReport evaluate_batch_loss(const CollocationMatrix& collocation,
                                    std::span<const CoefficientGrid> batch,
                                    std::span<const BinaryMask> masks, LossKind kind,
                                    double epsilon = kDefaultEpsilon, int jobs = 1);

}  // namespace isplines
