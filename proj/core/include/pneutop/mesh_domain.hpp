#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace pneutop {

// Numbering convention (column-major, as in the classic 88-line codes):
//   node (ix, iy), 0 <= ix <= nelx, 0 <= iy <= nely  ->  ix * (nely + 1) + iy
//   element (ex, ey)                                  ->  ex * nely + ey
//   dofs of node n                                    ->  2n (x), 2n + 1 (y)
// y points up; element nodes are listed counter-clockwise starting bottom-left.

enum class Region : std::uint8_t { design, solid, void_ };

enum class Side : std::uint8_t { left, right, bottom, top };

enum class Axis : std::uint8_t { x, y };

/// Half-open rectangle of element indices: [x0, x1) x [y0, y1).
struct ElementRect {
    int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
    bool operator==(const ElementRect&) const = default;
};

/// Inclusive range of node indices [from, to] along one side of the domain.
/// For left/right the index runs over iy, for bottom/top over ix.
struct NodeSegment {
    Side side = Side::left;
    int from = 0, to = 0;
    bool operator==(const NodeSegment&) const = default;
};

struct DomainConfig {
    int nelx = 0;
    int nely = 0;
    double elem_size = 1.0;

    std::vector<ElementRect> nds;  // non-design solid
    std::vector<ElementRect> ndv;  // non-design void

    std::vector<NodeSegment> inlet;    // p = p_in
    std::vector<NodeSegment> ambient;  // p = 0
    std::vector<NodeSegment> fixed;    // both displacement components clamped
    Side symmetry = Side::right;       // normal displacement clamped, zero flux

    int output_ix = 0;
    int output_iy = 0;
    Axis output_axis = Axis::x;
    // Entry of the output selector l at the output dof (+1 or -1). The
    // optimizer minimizes l^T u, so l is oriented such that the desired
    // motion makes l^T u negative.
    int output_sign = 1;
    double spring_stiffness = 1.0;

    bool operator==(const DomainConfig&) const = default;
};

/// Mirror a configuration about the vertical mid-line x = nelx / 2.
DomainConfig mirror_x(const DomainConfig& config);

std::string to_string(Side side);
std::string to_string(Axis axis);

class DomainModel {
public:
    explicit DomainModel(DomainConfig config);

    const DomainConfig& config() const { return config_; }

    int nelx() const { return config_.nelx; }
    int nely() const { return config_.nely; }
    double elem_size() const { return config_.elem_size; }
    double element_volume() const { return config_.elem_size * config_.elem_size; }

    int num_elements() const { return config_.nelx * config_.nely; }
    int num_nodes() const { return (config_.nelx + 1) * (config_.nely + 1); }
    int num_dofs() const { return 2 * num_nodes(); }

    int node_index(int ix, int iy) const { return ix * (config_.nely + 1) + iy; }
    int element_index(int ex, int ey) const { return ex * config_.nely + ey; }

    std::array<int, 4> element_nodes(int e) const;
    std::array<int, 8> element_dofs(int e) const;
    std::array<double, 2> node_coord(int n) const;
    std::array<double, 2> element_center(int e) const;

    Region region(int e) const { return regions_[static_cast<std::size_t>(e)]; }
    std::span<const Region> regions() const { return regions_; }

    /// Elements carrying an optimization variable, ascending.
    std::span<const int> design_elements() const { return design_elements_; }
    int num_design_variables() const { return static_cast<int>(design_elements_.size()); }

    std::span<const int> inlet_nodes() const { return inlet_nodes_; }
    std::span<const int> ambient_nodes() const { return ambient_nodes_; }
    std::span<const int> fixed_dofs() const { return fixed_dofs_; }

    int output_node() const { return output_node_; }
    int output_dof() const { return output_dof_; }
    double output_sign() const { return config_.output_sign; }
    double spring_stiffness() const { return config_.spring_stiffness; }

    /// Index of the element / node reflected about x = nelx / 2.
    int mirror_element(int e) const;
    int mirror_node(int n) const;

    /// Element volumes (all equal on this structured grid).
    std::vector<double> element_volumes() const;

private:
    DomainConfig config_;
    std::vector<Region> regions_;
    std::vector<int> design_elements_;
    std::vector<int> inlet_nodes_;
    std::vector<int> ambient_nodes_;
    std::vector<int> fixed_dofs_;
    int output_node_ = 0;
    int output_dof_ = 0;
};

/// Validates and builds the domain. Throws ConfigError on invalid input.
DomainModel build_domain(const DomainConfig& config);

} // namespace pneutop
