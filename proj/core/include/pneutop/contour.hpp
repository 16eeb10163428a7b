#pragma once

#include "pneutop/types.hpp"

#include <array>
#include <string>
#include <vector>

namespace pneutop {

using Point2 = std::array<double, 2>;

/// Closed loop; the last point connects back to the first.
struct Polyline {
    std::vector<Point2> points;
};

/// Marching squares on the element-centre grid padded with a ring of zeros,
/// so material touching the domain edge yields a loop along that edge.
/// Loops keep material on their left: outer boundaries are counter-clockwise
/// (positive area), holes clockwise. Saddle cells are resolved by the cell
/// average. `rho_bar` uses the column-major element numbering.
std::vector<Polyline> extract_contour(int nelx, int nely, double elem_size, const Vector& rho_bar,
                                      double level = 0.5);

/// Shoelace area, positive for counter-clockwise loops.
double signed_area(const Polyline& loop);
double total_signed_area(const std::vector<Polyline>& loops);

/// SVG document with y pointing up in model coordinates; even-odd fill.
std::string contours_svg(const std::vector<Polyline>& loops, double width, double height);

/// One line per segment: "loop x0 y0 x1 y1".
std::string contours_segments(const std::vector<Polyline>& loops);

} // namespace pneutop
