#pragma once

#include "isplines/types.hpp"

#include <array>
#include <iosfwd>
#include <vector>

namespace isplines {

struct Polyline {
  std::vector<std::array<double, 2>> points;  // (row, col) in pixel units
  bool closed = false;
};

/// Zero-level contours of a sampled field by marching squares. Crossings are
/// linearly interpolated along cell edges; "inside" is z > 0, matching
/// rasterize. Ambiguous saddle cells are resolved by the cell-center mean.
/// Chains that reach the image border are returned open.
std::vector<Polyline> zero_contours(const Field& z);

/// Plain-text dump: one "polyline <index> <closed|open> <count>" header per
/// chain followed by "<row> <col>" lines.
void write_polylines(std::ostream& out, const std::vector<Polyline>& lines);

}  // namespace isplines
