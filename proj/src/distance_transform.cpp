#include "isplines/distance_transform.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace isplines {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// 1D squared distance transform of sampled function f with sample step h.
// f may contain +inf (no site); output written to d.
struct EnvelopeScratch {
  std::vector<std::size_t> sites;
  std::vector<double> bounds;
  std::vector<double> f;
  std::vector<double> d;
};

void transform_1d(EnvelopeScratch& s, std::size_t n, double h) {
  s.sites.resize(n);
  s.bounds.resize(n + 1);
  auto pos = [h](std::size_t q) { return static_cast<double>(q) * h; };

  std::ptrdiff_t k = -1;
  for (std::size_t q = 0; q < n; ++q) {
    const double fq = s.f[q];
    if (fq == kInf) continue;
    const double pq = pos(q);
    while (k >= 0) {
      const std::size_t v = s.sites[static_cast<std::size_t>(k)];
      const double pv = pos(v);
      const double cross = ((fq + pq * pq) - (s.f[v] + pv * pv)) / (2.0 * (pq - pv));
      if (cross <= s.bounds[static_cast<std::size_t>(k)]) {
        --k;
        continue;
      }
      ++k;
      s.sites[static_cast<std::size_t>(k)] = q;
      s.bounds[static_cast<std::size_t>(k)] = cross;
      s.bounds[static_cast<std::size_t>(k) + 1] = kInf;
      break;
    }
    if (k < 0) {
      k = 0;
      s.sites[0] = q;
      s.bounds[0] = -kInf;
      s.bounds[1] = kInf;
    }
  }

  s.d.resize(n);
  if (k < 0) {
    std::fill(s.d.begin(), s.d.end(), kInf);
    return;
  }
  std::size_t j = 0;
  for (std::size_t q = 0; q < n; ++q) {
    const double pq = pos(q);
    while (s.bounds[j + 1] < pq) ++j;
    const std::size_t v = s.sites[j];
    const double delta = pq - pos(v);
    s.d[q] = delta * delta + s.f[v];
  }
}

}  // namespace

std::vector<double> squared_distance_transform(std::span<const std::uint8_t> features, GridShape shape,
                                               std::array<double, 3> spacing) {
  const std::size_t total = shape[0] * shape[1] * shape[2];
  if (features.size() != total) throw std::invalid_argument("feature grid size does not match shape");
  for (double h : spacing) {
    if (!(h > 0.0) || !std::isfinite(h)) throw std::invalid_argument("grid spacing must be positive");
  }

  std::vector<double> dist(total);
  for (std::size_t i = 0; i < total; ++i) dist[i] = features[i] ? 0.0 : kInf;

  const std::array<std::size_t, 3> strides = {shape[1] * shape[2], shape[2], 1};
  EnvelopeScratch scratch;
  for (int axis = 2; axis >= 0; --axis) {
    const std::size_t n = shape[static_cast<std::size_t>(axis)];
    if (n <= 1) continue;
    const std::size_t stride = strides[static_cast<std::size_t>(axis)];
    scratch.f.resize(n);
    // Visit every line along `axis`: iterate over all cells whose coordinate on that axis is 0.
    for (std::size_t base = 0; base < total; ++base) {
      if ((base / stride) % n != 0) continue;
      for (std::size_t q = 0; q < n; ++q) scratch.f[q] = dist[base + q * stride];
      transform_1d(scratch, n, spacing[static_cast<std::size_t>(axis)]);
      for (std::size_t q = 0; q < n; ++q) dist[base + q * stride] = scratch.d[q];
    }
  }
  return dist;
}

}  // namespace isplines
