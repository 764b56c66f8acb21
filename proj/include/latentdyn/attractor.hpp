#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "latentdyn/linalg.hpp"

namespace latentdyn {

struct GridCell {
  std::size_t ix = 0;
  std::size_t iy = 0;
  friend bool operator==(const GridCell&, const GridCell&) = default;
};

inline constexpr std::size_t kDeciles = 10;

/// Connected set of dense grid cells.
struct Basin {
  std::vector<GridCell> cells;
  std::size_t members = 0;  // time steps whose point falls in `cells`
  double occupancy = 0.0;   // members / N
  Point2 centroid;          // mean of member points
  /// dwell_curve[j]: fraction of the steps in time decile j that fall in the basin.
  std::array<double, kDeciles> dwell_curve{};
};

struct Extent {
  double xmin = 0.0, xmax = 0.0, ymin = 0.0, ymax = 0.0;
};

/// Grid-density basins of a 2D trajectory ("dark clusters").
struct BasinSet {
  std::size_t grid_size = 0;
  double quantile = 0.0;
  std::size_t threshold = 0;  // minimum count for a dense cell
  Extent extent;  // square bounding box of the points
  std::vector<std::size_t> counts;  // grid_size * grid_size, index iy * grid_size + ix
  std::vector<Basin> basins;        // sorted by occupancy, descending
  std::vector<int> point_basin;     // basin index per step, -1 if outside

  std::size_t count(std::size_t ix, std::size_t iy) const { return counts[iy * grid_size + ix]; }
  GridCell cell_of(const Point2& p) const;
};

/// Marks cells whose count reaches the `quantile` nearest-rank percentile of
/// the nonzero cell counts, then groups them into 4-connected basins.
BasinSet detect_basins(std::span<const Point2> z, std::size_t grid_size = 64, double quantile = 0.95);

/// Late minus early dwell fraction of the largest basin; positive means the
/// trajectory was captured over time.
double convergence_index(const BasinSet& b);

}  // namespace latentdyn
