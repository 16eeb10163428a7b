#include "pneutop/mesh_domain.hpp"

#include "pneutop/errors.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace pneutop {

namespace {

Side mirrored(Side side)
{
    switch (side) {
    case Side::left: return Side::right;
    case Side::right: return Side::left;
    default: return side;
    }
}

std::string describe(const ElementRect& r)
{
    std::ostringstream os;
    os << "[" << r.x0 << "," << r.x1 << ")x[" << r.y0 << "," << r.y1 << ")";
    return os.str();
}

void check_rect(const DomainConfig& c, const ElementRect& r, const char* what)
{
    if (r.x0 < 0 || r.y0 < 0 || r.x1 > c.nelx || r.y1 > c.nely || r.x0 >= r.x1 || r.y0 >= r.y1)
        throw ConfigError(std::string(what) + " rectangle " + describe(r) + " is empty or outside the domain");
}

int side_length(const DomainConfig& c, Side side)
{
    return (side == Side::left || side == Side::right) ? c.nely : c.nelx;
}

std::vector<int> collect_nodes(const DomainModel& d, const std::vector<NodeSegment>& segments,
                               const char* what)
{
    const auto& c = d.config();
    std::set<int> nodes;
    for (const auto& s : segments) {
        const int len = side_length(c, s.side);
        if (s.from < 0 || s.to > len || s.from > s.to)
            throw ConfigError(std::string(what) + " segment on " + to_string(s.side) + " side [" +
                              std::to_string(s.from) + "," + std::to_string(s.to) +
                              "] is outside 0.." + std::to_string(len));
        for (int k = s.from; k <= s.to; ++k) {
            switch (s.side) {
            case Side::left: nodes.insert(d.node_index(0, k)); break;
            case Side::right: nodes.insert(d.node_index(c.nelx, k)); break;
            case Side::bottom: nodes.insert(d.node_index(k, 0)); break;
            case Side::top: nodes.insert(d.node_index(k, c.nely)); break;
            }
        }
    }
    return {nodes.begin(), nodes.end()};
}

} // namespace

std::string to_string(Side side)
{
    switch (side) {
    case Side::left: return "left";
    case Side::right: return "right";
    case Side::bottom: return "bottom";
    case Side::top: return "top";
    }
    return "?";
}

std::string to_string(Axis axis) { return axis == Axis::x ? "x" : "y"; }

DomainConfig mirror_x(const DomainConfig& config)
{
    DomainConfig m = config;
    auto flip_rects = [&](std::vector<ElementRect>& rects) {
        for (auto& r : rects) r = {config.nelx - r.x1, r.y0, config.nelx - r.x0, r.y1};
    };
    auto flip_segments = [&](std::vector<NodeSegment>& segs) {
        for (auto& s : segs) {
            if (s.side == Side::bottom || s.side == Side::top)
                s = {s.side, config.nelx - s.to, config.nelx - s.from};
            else
                s.side = mirrored(s.side);
        }
    };
    flip_rects(m.nds);
    flip_rects(m.ndv);
    flip_segments(m.inlet);
    flip_segments(m.ambient);
    flip_segments(m.fixed);
    m.symmetry = mirrored(config.symmetry);
    m.output_ix = config.nelx - config.output_ix;
    if (config.output_axis == Axis::x) m.output_sign = -config.output_sign;
    return m;
}

DomainModel::DomainModel(DomainConfig config) : config_(std::move(config))
{
    auto& c = config_;
    if (c.nelx < 2 || c.nely < 2)
        throw ConfigError("domain must have at least 2x2 elements, got " + std::to_string(c.nelx) +
                          "x" + std::to_string(c.nely));
    if (!(c.elem_size > 0.0)) throw ConfigError("domain.elem_size must be positive");
    if (c.output_sign != 1 && c.output_sign != -1) throw ConfigError("output sign must be +1 or -1");
    if (c.spring_stiffness < 0.0) throw ConfigError("domain.spring_stiffness must be non-negative");

    regions_.assign(static_cast<std::size_t>(num_elements()), Region::design);
    for (const auto& r : c.nds) {
        check_rect(c, r, "NDS");
        for (int ex = r.x0; ex < r.x1; ++ex)
            for (int ey = r.y0; ey < r.y1; ++ey)
                regions_[static_cast<std::size_t>(element_index(ex, ey))] = Region::solid;
    }
    for (const auto& r : c.ndv) {
        check_rect(c, r, "NDV");
        for (int ex = r.x0; ex < r.x1; ++ex)
            for (int ey = r.y0; ey < r.y1; ++ey) {
                auto& tag = regions_[static_cast<std::size_t>(element_index(ex, ey))];
                if (tag == Region::solid)
                    throw ConfigError("NDV rectangle " + describe(r) + " overlaps an NDS region");
                tag = Region::void_;
            }
    }
    for (int e = 0; e < num_elements(); ++e)
        if (regions_[static_cast<std::size_t>(e)] == Region::design) design_elements_.push_back(e);

    if (c.inlet.empty()) throw ConfigError("domain.inlet must declare at least one node segment");
    inlet_nodes_ = collect_nodes(*this, c.inlet, "inlet");
    ambient_nodes_ = collect_nodes(*this, c.ambient, "ambient");
    std::vector<int> overlap;
    std::set_intersection(inlet_nodes_.begin(), inlet_nodes_.end(), ambient_nodes_.begin(),
                          ambient_nodes_.end(), std::back_inserter(overlap));
    if (!overlap.empty())
        throw ConfigError("inlet and ambient pressure node sets overlap at node " +
                          std::to_string(overlap.front()));

    std::set<int> fixed;
    for (int n : collect_nodes(*this, c.fixed, "fixed")) {
        fixed.insert(2 * n);
        fixed.insert(2 * n + 1);
    }
    const int sym_len = side_length(c, c.symmetry);
    for (int k = 0; k <= sym_len; ++k) {
        switch (c.symmetry) {
        case Side::left: fixed.insert(2 * node_index(0, k)); break;
        case Side::right: fixed.insert(2 * node_index(c.nelx, k)); break;
        case Side::bottom: fixed.insert(2 * node_index(k, 0) + 1); break;
        case Side::top: fixed.insert(2 * node_index(k, c.nely) + 1); break;
        }
    }
    fixed_dofs_.assign(fixed.begin(), fixed.end());

    if (c.output_ix < 0 || c.output_ix > c.nelx || c.output_iy < 0 || c.output_iy > c.nely)
        throw ConfigError("output node lies outside the domain");
    output_node_ = node_index(c.output_ix, c.output_iy);
    output_dof_ = 2 * output_node_ + (c.output_axis == Axis::x ? 0 : 1);
    if (fixed.contains(output_dof_)) throw ConfigError("output dof is in the fixed set");

    bool all_void = true;
    for (int dx = -1; dx <= 0; ++dx)
        for (int dy = -1; dy <= 0; ++dy) {
            const int ex = c.output_ix + dx, ey = c.output_iy + dy;
            if (ex < 0 || ey < 0 || ex >= c.nelx || ey >= c.nely) continue;
            if (region(element_index(ex, ey)) != Region::void_) all_void = false;
        }
    if (all_void) throw ConfigError("output node lies inside an NDV region");
}

std::array<int, 4> DomainModel::element_nodes(int e) const
{
    const int ex = e / config_.nely, ey = e % config_.nely;
    return {node_index(ex, ey), node_index(ex + 1, ey), node_index(ex + 1, ey + 1),
            node_index(ex, ey + 1)};
}

std::array<int, 8> DomainModel::element_dofs(int e) const
{
    const auto n = element_nodes(e);
    return {2 * n[0], 2 * n[0] + 1, 2 * n[1], 2 * n[1] + 1,
            2 * n[2], 2 * n[2] + 1, 2 * n[3], 2 * n[3] + 1};
}

std::array<double, 2> DomainModel::node_coord(int n) const
{
    const int ix = n / (config_.nely + 1), iy = n % (config_.nely + 1);
    return {ix * config_.elem_size, iy * config_.elem_size};
}

std::array<double, 2> DomainModel::element_center(int e) const
{
    const int ex = e / config_.nely, ey = e % config_.nely;
    return {(ex + 0.5) * config_.elem_size, (ey + 0.5) * config_.elem_size};
}

int DomainModel::mirror_element(int e) const
{
    const int ex = e / config_.nely, ey = e % config_.nely;
    return element_index(config_.nelx - 1 - ex, ey);
}

int DomainModel::mirror_node(int n) const
{
    const int ix = n / (config_.nely + 1), iy = n % (config_.nely + 1);
    return node_index(config_.nelx - ix, iy);
}

std::vector<double> DomainModel::element_volumes() const
{
    return std::vector<double>(static_cast<std::size_t>(num_elements()), element_volume());
}

DomainModel build_domain(const DomainConfig& config) { return DomainModel(config); }

} // namespace pneutop
