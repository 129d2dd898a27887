#pragma once

#include "isplines/collocation.hpp"
#include "isplines/types.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace isplines {

struct ConfusionCounts {
  std::int64_t tp = 0;
  std::int64_t tn = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;

  std::int64_t total() const { return tp + tn + fp + fn; }
  ConfusionCounts& operator+=(const ConfusionCounts& o) {
    tp += o.tp;
    tn += o.tn;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
  bool operator==(const ConfusionCounts&) const = default;
};

enum class MetricKind { Accuracy, Dice, Jaccard };

std::string_view to_string(MetricKind kind);

/// Pixel is inside iff Z > 0. Z == 0 counts as outside.
BinaryMask rasterize(const Field& z);

/// Throws std::invalid_argument on a shape mismatch.
ConfusionCounts confusion(const BinaryMask& pred, const BinaryMask& truth);

/// Jaccard TP/(TP+FP+FN), Dice 2TP/(2TP+FP+FN), Accuracy (TP+TN)/total.
/// Dice and Jaccard are 1 when both masks are empty. Throws
/// std::invalid_argument for zero total.
double score(const ConfusionCounts& counts, MetricKind kind);

/// Integer voxel coordinate (row, column, slice).
using Voxel = std::array<int, 3>;

/// sup_{a in A} inf_{b in B} |a - b|, coordinates scaled by spacing.
/// nullopt when either set is empty.
std::optional<double> directed_hausdorff(std::span<const Voxel> from, std::span<const Voxel> to,
                                         Spacing spacing = {});

/// Symmetric Hausdorff distance via exact distance transforms over the
/// bounding box of both sets. nullopt ("undefined") when either set is empty.
std::optional<double> hausdorff(std::span<const Voxel> a, std::span<const Voxel> b, Spacing spacing = {});

/// Coordinates (row, col, slice) of the mask's inside pixels.
std::vector<Voxel> foreground_voxels(const BinaryMask& mask, int slice = 0);

/// Ordered slices sharing one shape, plus the physical step per axis.
struct MaskVolume {
  std::vector<BinaryMask> slices;
  Spacing spacing;
};

/// Rasterizes one coefficient grid per slice on the given collocation grid.
MaskVolume rasterize_volume(const CollocationMatrix& collocation, std::span<const CoefficientGrid> slices,
                            Spacing spacing = {}, int jobs = 1);

struct VolumeScores {
  ConfusionCounts counts;
  double accuracy = 0.0;
  double dice = 0.0;
  double jaccard = 0.0;
  std::optional<double> hausdorff;
};

/// Scores from a single pair of counts; Hausdorff left unset.
VolumeScores scores_from_counts(const ConfusionCounts& counts);

/// Slice metrics in 2D (slice step irrelevant).
VolumeScores slice_metrics(const BinaryMask& pred, const BinaryMask& truth, Spacing spacing = {});

/// Confusion counts pooled over all slices, then scored; Hausdorff between
/// the 3D voxel sets of truth and prediction. The pred volume's spacing is
/// ignored in favour of the truth's. Throws std::invalid_argument for
/// mismatched stacks.
VolumeScores volume_metrics(const MaskVolume& pred, const MaskVolume& truth, int jobs = 1);

}  // namespace isplines
