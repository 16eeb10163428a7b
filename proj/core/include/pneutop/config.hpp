#pragma once

#include "pneutop/darcy_pressure.hpp"
#include "pneutop/design_fields.hpp"
#include "pneutop/mesh_domain.hpp"
#include "pneutop/mma.hpp"
#include "pneutop/sensitivity.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace pneutop {

struct OptimizationParams {
    double v_star = 0.20;
    double s_f = 0.90;
    double r_min = 7.6;  // element units (multiplied by elem_size)
    double delta_eta = 0.10;
    double beta_init = 1.0;
    double beta_max = 128.0;
    int beta_interval = 50;
    int max_iter = 400;
    // Stop once the design change is below 1e-3 with beta at its cap and both
    // constraints within 1e-3. Off by default: runs use the full budget.
    bool early_exit = false;
    // Objective rows handed to MMA are rescaled every iteration so the larger
    // of |f_b|, |f_e| equals this value.
    double objective_scale = 10.0;
    bool load_sensitivity = true;
    std::uint64_t seed = 0;  // reserved; initialization is deterministic

    bool operator==(const OptimizationParams&) const = default;
};

struct OutputParams {
    std::string directory = "run";
    int snapshot_interval = 0;  // density dumps every k iterations, 0 = off
    bool vtk = true;
    bool contours = true;

    bool operator==(const OutputParams&) const = default;
};

struct BaselineParams {
    int wall = 6;         // wall thickness in elements
    ElementRect cavity;   // air chamber; empty rect = derive from the inlet
    bool operator==(const BaselineParams&) const = default;
};

struct OptConfig {
    DomainConfig domain;
    SimpParams simp;
    double nu = 0.4;  // soft elastomer
    FlowParams flow;                // flow.delta_s is resolved by physics()
    std::optional<double> delta_s;  // empty = r_min * elem_size
    OptimizationParams optimization;
    MmaParams mma;
    OutputParams output;
    BaselineParams baseline;

    bool operator==(const OptConfig&) const = default;

    /// Physical parameters with delta_s resolved.
    PhysicsParams physics() const;
    double filter_radius() const { return optimization.r_min * domain.elem_size; }
};

/// Parses the flat INI-style text. Unknown sections or keys, malformed values,
/// out-of-range values and missing required keys throw ConfigError naming the
/// key path (e.g. "optimization.v_star").
OptConfig parse_config_text(const std::string& text);
OptConfig parse_config(const std::filesystem::path& path);

/// Full echo with every key; parse_config_text(echo_config(c)) == c.
std::string echo_config(const OptConfig& config);

/// Range checks shared by the parser and programmatic construction.
void validate(const OptConfig& config);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double value);

} // namespace pneutop
