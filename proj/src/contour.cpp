#include "isplines/contour.hpp"

#include <ostream>

namespace isplines {
namespace {

struct Segment {
  std::size_t edges[2];
};

class EdgeTable {
 public:
  EdgeTable(Eigen::Index rows, Eigen::Index cols)
      : cols_(static_cast<std::size_t>(cols)),
        owners_(2 * static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), {-1, -1}) {}

  std::size_t horizontal(Eigen::Index i, Eigen::Index j) const {
    return 2 * (static_cast<std::size_t>(i) * cols_ + static_cast<std::size_t>(j));
  }
  std::size_t vertical(Eigen::Index i, Eigen::Index j) const { return horizontal(i, j) + 1; }

  void attach(std::size_t edge, int segment) {
    auto& slot = owners_[edge];
    (slot[0] < 0 ? slot[0] : slot[1]) = segment;
  }
  const std::array<int, 2>& owners(std::size_t edge) const { return owners_[edge]; }

  // Crossing point on `edge` of field z.
  std::array<double, 2> point(const Field& z, std::size_t edge) const {
    const std::size_t cell = edge / 2;
    const auto i = static_cast<Eigen::Index>(cell / cols_);
    const auto j = static_cast<Eigen::Index>(cell % cols_);
    const bool vert = edge % 2 == 1;
    const double za = z(i, j);
    const double zb = vert ? z(i + 1, j) : z(i, j + 1);
    const double t = za / (za - zb);
    return vert ? std::array<double, 2>{static_cast<double>(i) + t, static_cast<double>(j)}
                : std::array<double, 2>{static_cast<double>(i), static_cast<double>(j) + t};
  }

 private:
  std::size_t cols_;
  std::vector<std::array<int, 2>> owners_;
};

}  // namespace

std::vector<Polyline> zero_contours(const Field& z) {
  std::vector<Polyline> out;
  if (z.rows() < 2 || z.cols() < 2) return out;

  EdgeTable table(z.rows(), z.cols());
  std::vector<Segment> segments;
  auto add = [&](std::size_t a, std::size_t b) {
    const int id = static_cast<int>(segments.size());
    segments.push_back({{a, b}});
    table.attach(a, id);
    table.attach(b, id);
  };

  for (Eigen::Index i = 0; i + 1 < z.rows(); ++i) {
    for (Eigen::Index j = 0; j + 1 < z.cols(); ++j) {
      const int code = (z(i, j) > 0.0 ? 1 : 0) | (z(i, j + 1) > 0.0 ? 2 : 0) |
                       (z(i + 1, j + 1) > 0.0 ? 4 : 0) | (z(i + 1, j) > 0.0 ? 8 : 0);
      if (code == 0 || code == 15) continue;
      const std::size_t top = table.horizontal(i, j);
      const std::size_t right = table.vertical(i, j + 1);
      const std::size_t bottom = table.horizontal(i + 1, j);
      const std::size_t left = table.vertical(i, j);
      if (code == 5 || code == 10) {
        const double center = 0.25 * (z(i, j) + z(i, j + 1) + z(i + 1, j + 1) + z(i + 1, j));
        // Cut off the two corners that do not share the center's side.
        if ((code == 5) == (center > 0.0)) {
          add(top, right);
          add(bottom, left);
        } else {
          add(left, top);
          add(right, bottom);
        }
        continue;
      }
      std::size_t crossed[2];
      int n = 0;
      const bool c0 = code & 1, c1 = code & 2, c2 = code & 4, c3 = code & 8;
      if (c0 != c1) crossed[n++] = top;
      if (c1 != c2) crossed[n++] = right;
      if (c3 != c2) crossed[n++] = bottom;
      if (c0 != c3) crossed[n++] = left;
      add(crossed[0], crossed[1]);
    }
  }

  std::vector<bool> used(segments.size(), false);
  auto walk = [&](int start, std::size_t start_edge) {
    Polyline line;
    line.points.push_back(table.point(z, start_edge));
    int seg = start;
    std::size_t edge = start_edge;
    while (true) {
      used[static_cast<std::size_t>(seg)] = true;
      const Segment& s = segments[static_cast<std::size_t>(seg)];
      edge = s.edges[0] == edge ? s.edges[1] : s.edges[0];
      if (edge == start_edge) {
        line.closed = true;
        break;
      }
      line.points.push_back(table.point(z, edge));
      const auto& owners = table.owners(edge);
      const int next = owners[0] == seg ? owners[1] : owners[0];
      if (next < 0 || used[static_cast<std::size_t>(next)]) break;
      seg = next;
    }
    out.push_back(std::move(line));
  };

  // Open chains start at an edge on the image border (owned by one segment).
  for (std::size_t k = 0; k < segments.size(); ++k) {
    if (used[k]) continue;
    for (std::size_t e : segments[k].edges) {
      const auto& owners = table.owners(e);
      if (owners[1] < 0) {
        walk(static_cast<int>(k), e);
        break;
      }
    }
  }
  for (std::size_t k = 0; k < segments.size(); ++k) {
    if (!used[k]) walk(static_cast<int>(k), segments[k].edges[0]);
  }
  return out;
}

void write_polylines(std::ostream& out, const std::vector<Polyline>& lines) {
  for (std::size_t k = 0; k < lines.size(); ++k) {
    const auto& line = lines[k];
    out << "polyline " << k << ' ' << (line.closed ? "closed" : "open") << ' ' << line.points.size() << '\n';
    for (const auto& p : line.points) out << p[0] << ' ' << p[1] << '\n';
  }
}

}  // namespace isplines
