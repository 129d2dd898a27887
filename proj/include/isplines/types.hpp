#pragma once

#include <Eigen/Core>

#include <cstdint>

namespace isplines {

/// Dense row-major float64 grid. Row index is the image's first axis.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Spline field sampled on the I x I collocation grid.
using Field = Matrix;

/// Binary segmentation mask, entries in {0, 1}; 1 means inside.
using BinaryMask = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Physical step along (row, column, slice).
struct Spacing {
  double x = 1.0;
  double y = 1.0;
  double z = 1.0;
};

}  // namespace isplines
