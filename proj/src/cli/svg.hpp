#pragma once

#include <span>
#include <string>

#include "latentdyn/attractor.hpp"

namespace latentdyn::cli {

/// Scatter of the projected trajectory with dense basin cells overlaid.
/// The first line after the XML prolog is a generation-time comment; the rest
/// is a pure function of the inputs.
std::string render_scatter_svg(std::span<const Point2> z, const BasinSet& basins, const std::string& timestamp);

}  // namespace latentdyn::cli
