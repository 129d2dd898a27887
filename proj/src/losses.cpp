#include "isplines/losses.hpp"

#include "isplines/parallel.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace isplines {
namespace {

void check_shapes(const Field& z, const BinaryMask& mask) {
  if (z.rows() != mask.rows() || z.cols() != mask.cols()) {
    throw std::invalid_argument("field is " + std::to_string(z.rows()) + "x" + std::to_string(z.cols()) +
                                " but mask is " + std::to_string(mask.rows()) + "x" +
                                std::to_string(mask.cols()));
  }
  if (z.size() == 0) throw std::invalid_argument("loss on an empty grid");
  validate_mask(mask);
}

void check_epsilon(double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
}

}  // namespace

std::string_view to_string(LossKind kind) {
  switch (kind) {
    case LossKind::MMAE: return "mmae";
    case LossKind::MMSE: return "mmse";
    case LossKind::Accuracy: return "accuracy";
    case LossKind::Dice: return "dice";
    case LossKind::Jaccard: return "jaccard";
  }
  return "unknown";
}

std::optional<LossKind> parse_loss_kind(std::string_view name) {
  for (auto kind : {LossKind::MMAE, LossKind::MMSE, LossKind::Accuracy, LossKind::Dice, LossKind::Jaccard}) {
    if (name == to_string(kind)) return kind;
  }
  return std::nullopt;
}

void validate_mask(const BinaryMask& mask) {
  for (Eigen::Index i = 0; i < mask.size(); ++i) {
    if (mask.data()[i] > 1) throw std::invalid_argument("mask entries must be 0 or 1");
  }
}

Matrix signed_mask(const BinaryMask& mask) {
  return mask.cast<double>().array() * 2.0 - 1.0;
}

// Algebraically 0.5 * (z / (eps + |z|) + 1); the split form keeps the
// negative tail strictly positive instead of cancelling to 0.
double smooth_indicator(double z, double epsilon) {
  if (z < 0.0) return epsilon / (2.0 * (epsilon - z));
  return 1.0 - epsilon / (2.0 * (epsilon + z));
}

double smooth_indicator_derivative(double z, double epsilon) {
  const double d = epsilon + std::abs(z);
  return epsilon / (2.0 * d * d);
}

Matrix smooth_indicator(const Field& z, double epsilon) {
  check_epsilon(epsilon);
  return z.unaryExpr([epsilon](double v) { return smooth_indicator(v, epsilon); });
}

FieldLoss loss_mmae(const Field& z, const BinaryMask& mask) {
  check_shapes(z, mask);
  const auto n = static_cast<double>(z.size());
  const Matrix diff = z - signed_mask(mask);
  FieldLoss out;
  out.value = diff.cwiseAbs().sum() / n;
  out.grad = diff.unaryExpr([n](double d) { return d > 0.0 ? 1.0 / n : (d < 0.0 ? -1.0 / n : 0.0); });
  return out;
}

FieldLoss loss_mmse(const Field& z, const BinaryMask& mask) {
  check_shapes(z, mask);
  const auto n = static_cast<double>(z.size());
  const Matrix diff = z - signed_mask(mask);
  FieldLoss out;
  out.value = diff.squaredNorm() / n;
  out.grad = diff * (2.0 / n);
  return out;
}

FieldLoss loss_region(const Field& z, const BinaryMask& mask, LossKind kind, double epsilon) {
  check_shapes(z, mask);
  check_epsilon(epsilon);
  const Eigen::Index n = z.size();
  const double* zv = z.data();
  const std::uint8_t* yv = mask.data();

  double sum_y = 0.0;
  double sum_zh = 0.0;
  double sum_yzh = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double zh = smooth_indicator(zv[k], epsilon);
    const double y = yv[k];
    sum_y += y;
    sum_zh += zh;
    sum_yzh += y * zh;
  }

  FieldLoss out;
  out.grad.resize(z.rows(), z.cols());
  double* g = out.grad.data();

  // dL/dz_k = -dS/dzhat_k * dzhat/dz_k, with S the soft score
  switch (kind) {
    case LossKind::Jaccard: {
      const double inter = sum_yzh;
      const double uni = sum_y + sum_zh - sum_yzh;
      out.value = 1.0 - inter / uni;
      const double inv = 1.0 / (uni * uni);
      for (Eigen::Index k = 0; k < n; ++k) {
        const double y = yv[k];
        const double ds = (y * uni - inter * (1.0 - y)) * inv;
        g[k] = -ds * smooth_indicator_derivative(zv[k], epsilon);
      }
      break;
    }
    case LossKind::Dice: {
      const double num = 2.0 * sum_yzh;
      const double den = sum_y + sum_zh;
      out.value = 1.0 - num / den;
      const double inv = 1.0 / (den * den);
      for (Eigen::Index k = 0; k < n; ++k) {
        const double ds = (2.0 * yv[k] * den - num) * inv;
        g[k] = -ds * smooth_indicator_derivative(zv[k], epsilon);
      }
      break;
    }
    case LossKind::Accuracy: {
      const auto count = static_cast<double>(n);
      out.value = 1.0 - (count - sum_y - sum_zh + 2.0 * sum_yzh) / count;
      for (Eigen::Index k = 0; k < n; ++k) {
        const double ds = (2.0 * yv[k] - 1.0) / count;
        g[k] = -ds * smooth_indicator_derivative(zv[k], epsilon);
      }
      break;
    }
    default:
      throw std::invalid_argument("loss_region expects Accuracy, Dice or Jaccard");
  }
  return out;
}

FieldLoss field_loss(const Field& z, const BinaryMask& mask, LossKind kind, double epsilon) {
  switch (kind) {
    case LossKind::MMAE: return loss_mmae(z, mask);
    case LossKind::MMSE: return loss_mmse(z, mask);
    default: return loss_region(z, mask, kind, epsilon);
  }
}

Matrix backprop_to_coefficients(const Matrix& grad_field, const CollocationMatrix& collocation) {
  const Matrix& u = collocation.entries();
  if (grad_field.rows() != u.rows() || grad_field.cols() != u.rows()) {
    throw std::invalid_argument("field gradient must be " + std::to_string(u.rows()) + "x" +
                                std::to_string(u.rows()));
  }
  const Matrix partial = u.transpose() * grad_field;
  return partial * u;
}

LossReport evaluate_loss(const CollocationMatrix& collocation, const Matrix& coefficients,
                         const BinaryMask& mask, LossKind kind, double epsilon) {
  const Field z = evaluate_grid(collocation, coefficients);
  FieldLoss fl = field_loss(z, mask, kind, epsilon);
  return {fl.value, backprop_to_coefficients(fl.grad, collocation), kind};
}

LossReport evaluate_loss(const CollocationMatrix& collocation, const CoefficientGrid& coefficients,
                         const BinaryMask& mask, LossKind kind, double epsilon) {
  if (!(collocation.space() == coefficients.space())) {
    throw std::invalid_argument("coefficient grid and collocation matrix use different spline spaces");
  }
  return evaluate_loss(collocation, coefficients.values(), mask, kind, epsilon);
}

BatchLossReport evaluate_batch_loss(const CollocationMatrix& collocation,
                                    std::span<const CoefficientGrid> batch,
                                    std::span<const BinaryMask> masks, LossKind kind,
                                    double epsilon, int jobs) {
  if (batch.size() != masks.size() || batch.empty()) {
    throw std::invalid_argument("batch loss needs equally many (non-zero) grids and masks");
  }
  std::vector<LossReport> slices(batch.size());
  parallel_for(batch.size(), jobs, [&](std::size_t m) {
    slices[m] = evaluate_loss(collocation, batch[m], masks[m], kind, epsilon);
  });
  const auto count = static_cast<double>(batch.size());
  BatchLossReport out;
  out.kind = kind;
  out.grad_coefficients.reserve(batch.size());
  for (auto& s : slices) {
    out.loss += s.loss;
    out.grad_coefficients.push_back(s.grad_coefficients / count);
  }
  out.loss /= count;
  return out;
}

}  // namespace isplines
