#include "latentdyn/attractor.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>

#include "latentdyn/error.hpp"

namespace latentdyn {

namespace {

std::size_t axis_index(double v, double lo, double hi, std::size_t g) {
  if (hi <= lo) return 0;
  const double u = (v - lo) / (hi - lo);
  if (!(u > 0.0)) return 0;
  const auto i = static_cast<std::size_t>(std::floor(u * static_cast<double>(g)));
  return std::min(i, g - 1);
}

}  // namespace

GridCell BasinSet::cell_of(const Point2& p) const {
  return {axis_index(p.x, extent.xmin, extent.xmax, grid_size), axis_index(p.y, extent.ymin, extent.ymax, grid_size)};
}

BasinSet detect_basins(std::span<const Point2> z, std::size_t grid_size, double quantile) {
  const std::size_t steps = z.size();
  if (grid_size < 1) fail(ErrorCode::Precondition, "grid size must be positive");
  if (steps < grid_size) {
    fail(ErrorCode::Precondition,
         "need N >= grid size, got N = " + std::to_string(steps) + ", grid " + std::to_string(grid_size));
  }
  if (!(quantile >= 0.5 && quantile < 1.0)) {
    fail(ErrorCode::Precondition, "quantile " + std::to_string(quantile) + " outside [0.5, 1)");
  }

  BasinSet out;
  out.grid_size = grid_size;
  out.quantile = quantile;
  out.extent = {z[0].x, z[0].x, z[0].y, z[0].y};
  for (const auto& p : z) {
    out.extent.xmin = std::min(out.extent.xmin, p.x);
    out.extent.xmax = std::max(out.extent.xmax, p.x);
    out.extent.ymin = std::min(out.extent.ymin, p.y);
    out.extent.ymax = std::max(out.extent.ymax, p.y);
  }
  if (out.extent.xmax == out.extent.xmin && out.extent.ymax == out.extent.ymin) {
    fail(ErrorCode::DegenerateExtent, "all points coincide; bounding box has zero extent");
  }
  // Square cells: both axes share the larger side, centred on the data.
  const double side = std::max(out.extent.xmax - out.extent.xmin, out.extent.ymax - out.extent.ymin);
  const double cx = 0.5 * (out.extent.xmin + out.extent.xmax);
  const double cy = 0.5 * (out.extent.ymin + out.extent.ymax);
  out.extent = {cx - 0.5 * side, cx + 0.5 * side, cy - 0.5 * side, cy + 0.5 * side};

  const std::size_t g = grid_size;
  out.counts.assign(g * g, 0);
  std::vector<std::size_t> point_cell(steps);
  for (std::size_t n = 0; n < steps; ++n) {
    const auto c = out.cell_of(z[n]);
    point_cell[n] = c.iy * g + c.ix;
    ++out.counts[point_cell[n]];
  }

  std::vector<std::size_t> nonzero;
  for (auto c : out.counts)
    if (c > 0) nonzero.push_back(c);
  std::sort(nonzero.begin(), nonzero.end());
  auto rank = static_cast<std::size_t>(std::ceil(quantile * static_cast<double>(nonzero.size())));
  rank = std::clamp<std::size_t>(rank, 1, nonzero.size());
  out.threshold = nonzero[rank - 1];

  // Label 4-connected components of dense cells in row-major scan order.
  std::vector<int> label(g * g, -1);
  std::vector<std::vector<std::size_t>> components;
  for (std::size_t start = 0; start < g * g; ++start) {
    if (label[start] >= 0 || out.counts[start] < out.threshold) continue;
    const int id = static_cast<int>(components.size());
    components.emplace_back();
    std::deque<std::size_t> queue{start};
    label[start] = id;
    while (!queue.empty()) {
      const std::size_t cell = queue.front();
      queue.pop_front();
      components.back().push_back(cell);
      const std::size_t ix = cell % g;
      const std::size_t iy = cell / g;
      auto visit = [&](std::size_t nb) {
        if (label[nb] < 0 && out.counts[nb] >= out.threshold) {
          label[nb] = id;
          queue.push_back(nb);
        }
      };
      if (ix > 0) visit(cell - 1);
      if (ix + 1 < g) visit(cell + 1);
      if (iy > 0) visit(cell - g);
      if (iy + 1 < g) visit(cell + g);
    }
  }

  const std::size_t count = components.size();
  std::vector<Basin> basins(count);
  std::vector<std::array<std::size_t, kDeciles>> decile_hits(count);
  std::array<std::size_t, kDeciles> decile_size{};
  std::vector<double> sx(count, 0.0), sy(count, 0.0);
  for (std::size_t n = 0; n < steps; ++n) {
    const std::size_t decile = n * kDeciles / steps;
    ++decile_size[decile];
    const int id = label[point_cell[n]];
    if (id < 0) continue;
    auto& b = basins[static_cast<std::size_t>(id)];
    ++b.members;
    sx[static_cast<std::size_t>(id)] += z[n].x;
    sy[static_cast<std::size_t>(id)] += z[n].y;
    ++decile_hits[static_cast<std::size_t>(id)][decile];
  }
  for (std::size_t i = 0; i < count; ++i) {
    auto& b = basins[i];
    std::sort(components[i].begin(), components[i].end());
    for (auto cell : components[i]) b.cells.push_back({cell % g, cell / g});
    b.occupancy = static_cast<double>(b.members) / static_cast<double>(steps);
    if (b.members > 0) b.centroid = {sx[i] / static_cast<double>(b.members), sy[i] / static_cast<double>(b.members)};
    for (std::size_t j = 0; j < kDeciles; ++j) {
      b.dwell_curve[j] =
          decile_size[j] > 0 ? static_cast<double>(decile_hits[i][j]) / static_cast<double>(decile_size[j]) : 0.0;
    }
  }

  std::vector<std::size_t> order(count);
  for (std::size_t i = 0; i < count; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return basins[a].members > basins[b].members; });
  std::vector<int> new_index(count);
  out.basins.reserve(count);
  for (std::size_t r = 0; r < count; ++r) {
    new_index[order[r]] = static_cast<int>(r);
    out.basins.push_back(std::move(basins[order[r]]));
  }
  out.point_basin.resize(steps);
  for (std::size_t n = 0; n < steps; ++n) {
    const int id = label[point_cell[n]];
    out.point_basin[n] = id < 0 ? -1 : new_index[static_cast<std::size_t>(id)];
  }
  return out;
}

double convergence_index(const BasinSet& b) {
  if (b.basins.empty()) fail(ErrorCode::Precondition, "convergence index needs at least one basin");
  const auto& curve = b.basins.front().dwell_curve;
  return curve[kDeciles - 1] - curve[0];
}

}  // namespace latentdyn
