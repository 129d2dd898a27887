#include "isplines/metrics.hpp"

#include "isplines/distance_transform.hpp"
#include "isplines/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace isplines {

std::string_view to_string(MetricKind kind) {
  switch (kind) {
    case MetricKind::Accuracy: return "accuracy";
    case MetricKind::Dice: return "dice";
    case MetricKind::Jaccard: return "jaccard";
  }
  return "unknown";
}

BinaryMask rasterize(const Field& z) {
  return z.unaryExpr([](double v) -> std::uint8_t { return v > 0.0 ? 1 : 0; });
}

ConfusionCounts confusion(const BinaryMask& pred, const BinaryMask& truth) {
  if (pred.rows() != truth.rows() || pred.cols() != truth.cols()) {
    throw std::invalid_argument("prediction is " + std::to_string(pred.rows()) + "x" +
                                std::to_string(pred.cols()) + " but truth is " +
                                std::to_string(truth.rows()) + "x" + std::to_string(truth.cols()));
  }
  ConfusionCounts c;
  const std::uint8_t* p = pred.data();
  const std::uint8_t* t = truth.data();
  for (Eigen::Index k = 0; k < pred.size(); ++k) {
    const bool in_p = p[k] != 0;
    const bool in_t = t[k] != 0;
    if (in_p && in_t) ++c.tp;
    else if (in_p) ++c.fp;
    else if (in_t) ++c.fn;
    else ++c.tn;
  }
  return c;
}

double score(const ConfusionCounts& c, MetricKind kind) {
  if (c.total() <= 0) throw std::invalid_argument("score of an empty comparison");
  const auto tp = static_cast<double>(c.tp);
  const auto errors = static_cast<double>(c.fp + c.fn);
  switch (kind) {
    case MetricKind::Accuracy:
      return static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
    case MetricKind::Dice:
      if (c.tp + c.fp + c.fn == 0) return 1.0;
      return 2.0 * tp / (2.0 * tp + errors);
    case MetricKind::Jaccard:
      if (c.tp + c.fp + c.fn == 0) return 1.0;
      return tp / (tp + errors);
  }
  throw std::invalid_argument("unknown metric");
}

std::optional<double> directed_hausdorff(std::span<const Voxel> from, std::span<const Voxel> to,
                                         Spacing spacing) {
  if (from.empty() || to.empty()) return std::nullopt;

  Voxel lo = from.front();
  Voxel hi = from.front();
  auto grow = [&](const Voxel& v) {
    for (std::size_t a = 0; a < 3; ++a) {
      lo[a] = std::min(lo[a], v[a]);
      hi[a] = std::max(hi[a], v[a]);
    }
  };
  for (const auto& v : from) grow(v);
  for (const auto& v : to) grow(v);

  // Grid axes ordered (slice, row, col) for the transform.
  const GridShape shape = {static_cast<std::size_t>(hi[2] - lo[2] + 1),
                           static_cast<std::size_t>(hi[0] - lo[0] + 1),
                           static_cast<std::size_t>(hi[1] - lo[1] + 1)};
  auto index = [&](const Voxel& v) {
    return (static_cast<std::size_t>(v[2] - lo[2]) * shape[1] + static_cast<std::size_t>(v[0] - lo[0])) *
               shape[2] +
           static_cast<std::size_t>(v[1] - lo[1]);
  };
  std::vector<std::uint8_t> features(shape[0] * shape[1] * shape[2], 0);
  for (const auto& v : to) features[index(v)] = 1;
  const auto dist = squared_distance_transform(features, shape, {spacing.z, spacing.x, spacing.y});

  double worst = 0.0;
  for (const auto& v : from) worst = std::max(worst, dist[index(v)]);
  return std::sqrt(worst);
}

std::optional<double> hausdorff(std::span<const Voxel> a, std::span<const Voxel> b, Spacing spacing) {
  const auto ab = directed_hausdorff(a, b, spacing);
  if (!ab) return std::nullopt;
  const auto ba = directed_hausdorff(b, a, spacing);
  return std::max(*ab, *ba);
}

std::vector<Voxel> foreground_voxels(const BinaryMask& mask, int slice) {
  std::vector<Voxel> out;
  for (Eigen::Index i = 0; i < mask.rows(); ++i) {
    for (Eigen::Index j = 0; j < mask.cols(); ++j) {
      if (mask(i, j)) out.push_back({static_cast<int>(i), static_cast<int>(j), slice});
    }
  }
  return out;
}

MaskVolume rasterize_volume(const CollocationMatrix& collocation, std::span<const CoefficientGrid> slices,
                            Spacing spacing, int jobs) {
  MaskVolume out;
  out.spacing = spacing;
  out.slices.resize(slices.size());
  parallel_for(slices.size(), jobs,
               [&](std::size_t l) { out.slices[l] = rasterize(evaluate_grid(collocation, slices[l])); });
  return out;
}

VolumeScores scores_from_counts(const ConfusionCounts& counts) {
  VolumeScores s;
  s.counts = counts;
  s.accuracy = score(counts, MetricKind::Accuracy);
  s.dice = score(counts, MetricKind::Dice);
  s.jaccard = score(counts, MetricKind::Jaccard);
  return s;
}

VolumeScores slice_metrics(const BinaryMask& pred, const BinaryMask& truth, Spacing spacing) {
  VolumeScores s = scores_from_counts(confusion(pred, truth));
  const auto truth_set = foreground_voxels(truth);
  const auto pred_set = foreground_voxels(pred);
  s.hausdorff = hausdorff(truth_set, pred_set, spacing);
  return s;
}

VolumeScores volume_metrics(const MaskVolume& pred, const MaskVolume& truth, int jobs) {
  if (pred.slices.size() != truth.slices.size()) {
    throw std::invalid_argument("prediction has " + std::to_string(pred.slices.size()) +
                                " slices but truth has " + std::to_string(truth.slices.size()));
  }
  if (truth.slices.empty()) throw std::invalid_argument("volume has no slices");
  const auto rows = truth.slices.front().rows();
  const auto cols = truth.slices.front().cols();
  for (std::size_t l = 0; l < truth.slices.size(); ++l) {
    if (truth.slices[l].rows() != rows || truth.slices[l].cols() != cols ||
        pred.slices[l].rows() != rows || pred.slices[l].cols() != cols) {
      throw std::invalid_argument("slice " + std::to_string(l) + " shape differs from slice 0");
    }
  }

  std::vector<ConfusionCounts> per_slice(truth.slices.size());
  parallel_for(truth.slices.size(), jobs,
               [&](std::size_t l) { per_slice[l] = confusion(pred.slices[l], truth.slices[l]); });
  ConfusionCounts pooled;
  for (const auto& c : per_slice) pooled += c;

  VolumeScores s = scores_from_counts(pooled);
  std::vector<Voxel> truth_set;
  std::vector<Voxel> pred_set;
  for (std::size_t l = 0; l < truth.slices.size(); ++l) {
    auto t = foreground_voxels(truth.slices[l], static_cast<int>(l));
    auto p = foreground_voxels(pred.slices[l], static_cast<int>(l));
    truth_set.insert(truth_set.end(), t.begin(), t.end());
    pred_set.insert(pred_set.end(), p.begin(), p.end());
  }
  s.hausdorff = hausdorff(truth_set, pred_set, truth.spacing);
  return s;
}

}  // namespace isplines
