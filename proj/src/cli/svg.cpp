#include "svg.hpp"

#include <array>
#include <cstdio>

namespace latentdyn::cli {

namespace {

constexpr double kSize = 640.0;
constexpr double kMargin = 20.0;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

}  // namespace

std::string render_scatter_svg(std::span<const Point2> z, const BasinSet& b, const std::string& timestamp) {
  const double span_x = b.extent.xmax > b.extent.xmin ? b.extent.xmax - b.extent.xmin : 1.0;
  const double span_y = b.extent.ymax > b.extent.ymin ? b.extent.ymax - b.extent.ymin : 1.0;
  const double inner = kSize - 2 * kMargin;
  auto sx = [&](double x) { return kMargin + (x - b.extent.xmin) / span_x * inner; };
  // SVG y grows downward.
  auto sy = [&](double y) { return kSize - kMargin - (y - b.extent.ymin) / span_y * inner; };
  const double cell_w = inner / static_cast<double>(b.grid_size);

  static constexpr std::array<const char*, 4> kPalette = {"#d62728", "#ff7f0e", "#2ca02c", "#9467bd"};

  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<!-- generated " + timestamp + " -->\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kSize) + "\" height=\"" + num(kSize) +
         "\" viewBox=\"0 0 " + num(kSize) + " " + num(kSize) + "\">\n";
  out += "<rect x=\"0\" y=\"0\" width=\"" + num(kSize) + "\" height=\"" + num(kSize) + "\" fill=\"white\"/>\n";
  out += "<rect x=\"" + num(kMargin) + "\" y=\"" + num(kMargin) + "\" width=\"" + num(inner) + "\" height=\"" +
         num(inner) + "\" fill=\"none\" stroke=\"#888\"/>\n";

  out += "<g fill=\"#1f3a93\" fill-opacity=\"0.35\">\n";
  for (const auto& p : z) {
    out += "<circle cx=\"" + num(sx(p.x)) + "\" cy=\"" + num(sy(p.y)) + "\" r=\"1.2\"/>\n";
  }
  out += "</g>\n";

  for (std::size_t i = 0; i < b.basins.size(); ++i) {
    const char* color = kPalette[std::min(i, kPalette.size() - 1)];
    out += "<g fill=\"" + std::string(color) + "\" fill-opacity=\"0.25\" stroke=\"" + color +
           "\" stroke-width=\"0.5\">\n";
    for (const auto& c : b.basins[i].cells) {
      const double x = kMargin + static_cast<double>(c.ix) * cell_w;
      const double y = kSize - kMargin - static_cast<double>(c.iy + 1) * cell_w;
      out += "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(cell_w) + "\" height=\"" +
             num(cell_w) + "\"/>\n";
    }
    out += "</g>\n";
  }
  if (!b.basins.empty()) {
    const auto& c = b.basins.front().centroid;
    out += "<circle cx=\"" + num(sx(c.x)) + "\" cy=\"" + num(sy(c.y)) +
           "\" r=\"4\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\"/>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace latentdyn::cli
