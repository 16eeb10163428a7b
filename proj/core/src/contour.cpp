#include "pneutop/contour.hpp"

#include "pneutop/config.hpp"
#include "pneutop/errors.hpp"

#include <map>
#include <sstream>

namespace pneutop {

namespace {

struct Segment {
    long start_edge, end_edge;
    Point2 a, b;
};

} // namespace

std::vector<Polyline> extract_contour(int nelx, int nely, double elem_size, const Vector& rho_bar, double level)
{
    if (rho_bar.size() != static_cast<Eigen::Index>(nelx) * nely)
        throw ShapeError("contour field has " + std::to_string(rho_bar.size()) + " entries, expected " +
                         std::to_string(static_cast<long>(nelx) * nely));

    // Padded grid of (nelx + 2) x (nely + 2) sample points; point (i, j)
    // sits at the centre of element (i - 1, j - 1).
    const int gx = nelx + 2, gy = nely + 2;
    auto value = [&](int i, int j) {
        if (i < 1 || j < 1 || i > nelx || j > nely) return 0.0;
        return rho_bar[static_cast<Eigen::Index>(i - 1) * nely + (j - 1)];
    };
    auto position = [&](int i, int j) { return Point2{(i - 0.5) * elem_size, (j - 0.5) * elem_size}; };
    // Edge ids: horizontal edge from (i, j) to (i + 1, j), vertical from (i, j) to (i, j + 1).
    auto h_edge = [&](int i, int j) { return 2L * (static_cast<long>(i) * gy + j); };
    auto v_edge = [&](int i, int j) { return 2L * (static_cast<long>(i) * gy + j) + 1; };

    std::vector<Segment> segments;
    for (int i = 0; i + 1 < gx; ++i) {
        for (int j = 0; j + 1 < gy; ++j) {
            // Corners counter-clockwise from bottom-left; edge k runs corner k -> k+1.
            const std::array<std::array<int, 2>, 4> c{{{i, j}, {i + 1, j}, {i + 1, j + 1}, {i, j + 1}}};
            const std::array<long, 4> edge{h_edge(i, j), v_edge(i + 1, j), h_edge(i, j + 1), v_edge(i, j)};
            std::array<double, 4> v{};
            std::array<bool, 4> in{};
            int count = 0;
            for (int k = 0; k < 4; ++k) {
                v[static_cast<std::size_t>(k)] = value(c[static_cast<std::size_t>(k)][0], c[static_cast<std::size_t>(k)][1]);
                in[static_cast<std::size_t>(k)] = v[static_cast<std::size_t>(k)] > level;
                count += in[static_cast<std::size_t>(k)];
            }
            if (count == 0 || count == 4) continue;

            struct Crossing {
                long edge;
                Point2 p;
                bool exit;  // walking the cell boundary counter-clockwise, material -> empty
            };
            std::vector<Crossing> crossings;
            for (std::size_t k = 0; k < 4; ++k) {
                const std::size_t n = (k + 1) % 4;
                if (in[k] == in[n]) continue;
                const double t = (level - v[k]) / (v[n] - v[k]);
                const Point2 pa = position(c[k][0], c[k][1]);
                const Point2 pb = position(c[n][0], c[n][1]);
                crossings.push_back({edge[k], {pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1])}, in[k]});
            }
            // An exit pairs with the following crossing when the cell centre
            // is material (corners joined through the centre), else with the
            // preceding one.
            const bool centre_in = 0.25 * (v[0] + v[1] + v[2] + v[3]) > level;
            const std::size_t m = crossings.size();
            for (std::size_t k = 0; k < m; ++k) {
                if (!crossings[k].exit) continue;
                const auto& to = crossings[centre_in ? (k + 1) % m : (k + m - 1) % m];
                segments.push_back({crossings[k].edge, to.edge, crossings[k].p, to.p});
            }
        }
    }

    std::map<long, std::size_t> by_start;
    for (std::size_t s = 0; s < segments.size(); ++s) by_start[segments[s].start_edge] = s;

    std::vector<Polyline> loops;
    std::vector<bool> used(segments.size(), false);
    for (std::size_t s0 = 0; s0 < segments.size(); ++s0) {
        if (used[s0]) continue;
        Polyline loop;
        std::size_t s = s0;
        while (!used[s]) {
            used[s] = true;
            loop.points.push_back(segments[s].a);
            const auto it = by_start.find(segments[s].end_edge);
            if (it == by_start.end()) throw std::logic_error("contour segment chain is broken");
            s = it->second;
        }
        loops.push_back(std::move(loop));
    }
    return loops;
}

double signed_area(const Polyline& loop)
{
    const auto& p = loop.points;
    double twice = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        const auto& a = p[k];
        const auto& b = p[(k + 1) % p.size()];
        twice += a[0] * b[1] - b[0] * a[1];
    }
    return 0.5 * twice;
}

double total_signed_area(const std::vector<Polyline>& loops)
{
    double total = 0.0;
    for (const auto& l : loops) total += signed_area(l);
    return total;
}

std::string contours_svg(const std::vector<Polyline>& loops, double width, double height)
{
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << format_double(width) << ' '
       << format_double(height) << "\" width=\"" << format_double(width * 4) << "\" height=\""
       << format_double(height * 4) << "\">\n";
    os << "<rect x=\"0\" y=\"0\" width=\"" << format_double(width) << "\" height=\"" << format_double(height)
       << "\" fill=\"white\" stroke=\"#999\" stroke-width=\"0.2\"/>\n";
    os << "<path fill=\"black\" fill-rule=\"evenodd\" d=\"";
    for (const auto& l : loops) {
        for (std::size_t k = 0; k < l.points.size(); ++k)
            os << (k == 0 ? "M" : " L") << format_double(l.points[k][0]) << ' '
               << format_double(height - l.points[k][1]);
        os << " Z ";
    }
    os << "\"/>\n</svg>\n";
    return os.str();
}

std::string contours_segments(const std::vector<Polyline>& loops)
{
    std::ostringstream os;
    os << "# loop x0 y0 x1 y1\n";
    for (std::size_t l = 0; l < loops.size(); ++l) {
        const auto& p = loops[l].points;
        for (std::size_t k = 0; k < p.size(); ++k) {
            const auto& a = p[k];
            const auto& b = p[(k + 1) % p.size()];
            os << l << ' ' << format_double(a[0]) << ' ' << format_double(a[1]) << ' ' << format_double(b[0]) << ' '
               << format_double(b[1]) << '\n';
        }
    }
    return os.str();
}

} // namespace pneutop
