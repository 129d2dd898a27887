#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace isplines {

/// Grid extent as (slices, rows, columns); a 2D grid has one slice.
using GridShape = std::array<std::size_t, 3>;

/**
 * Exact squared Euclidean distance from every cell center to the nearest
 * feature cell (nonzero entry of `features`), on a row-major grid with
 * per-axis step `spacing` = (slice step, row step, column step).
 *
 * Separable lower-envelope-of-parabolas transform, one 1D pass per axis.
 * Cells get +infinity when there is no feature cell at all. With integer
 * steps every intermediate is an integer held exactly in a double, so the
 * result matches a brute-force nearest-feature search bit for bit.
 */
std::vector<double> squared_distance_transform(std::span<const std::uint8_t> features, GridShape shape,
                                               std::array<double, 3> spacing = {1.0, 1.0, 1.0});

}  // namespace isplines
