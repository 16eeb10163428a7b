#pragma once

#include "pneutop/darcy_pressure.hpp"
#include "pneutop/design_fields.hpp"
#include "pneutop/elastostatics.hpp"
#include "pneutop/mesh_domain.hpp"
#include "pneutop/types.hpp"

#include <array>
#include <functional>
#include <string>
#include <vector>

namespace pneutop {

struct PhysicsParams {
    SimpParams simp;
    FlowParams flow;
    double nu = 0.4;

    bool operator==(const PhysicsParams&) const = default;
};

/// Forward state of one physical density field.
struct PhysicalState {
    Vector rho_bar;
    ModulusField modulus;
    CoefficientField flow;      // K(rho_bar)
    CoefficientField drainage;  // D(rho_bar)
    Vector pressure;            // nodal p
    Vector force;               // F = -T p
    Vector displacement;        // u
    double u_out = 0.0;         // l^T u
    double strain_energy = 0.0; // 1/2 u^T K u
    // Set when rho_bar has no material at all: no structure exists, so the
    // response is reported as zero instead of solving on the E0 floor.
    bool empty_structure = false;
    bool valid = false;
};

/// Pressure solve followed by the elastic solve for a physical density
/// field. Keeps both factorizations for the adjoint solves.
class StateModel {
public:
    StateModel(const DomainModel& domain, const PhysicsParams& params);

    const PhysicalState& solve(const Vector& rho_bar);

    const PhysicalState& state() const { return state_; }
    const DomainModel& domain() const { return *domain_; }
    const PhysicsParams& params() const { return params_; }
    const PressureSolver& pressure_solver() const { return pressure_; }
    const ElasticSolver& elastic_solver() const { return elastic_; }
    const SparseMatrix& coupling() const { return coupling_; }

private:
    const DomainModel* domain_;
    PhysicsParams params_;
    SparseMatrix coupling_;
    PressureSolver pressure_;
    ElasticSolver elastic_;
    PhysicalState state_;
};

struct AdjointOptions {
    // false drops the term carrying the design dependence of the pressure load.
    bool include_load_term = true;
};

/// d(l^T u)/d rho_bar with the load term through the pressure field.
/// w = K^{-1} l, mu = A^{-1} T^T w:
///   df/drho_bar_e = -dE_e w_e^T k0 u_e + mu_e^T dR_e,
///   dR_e = dK_e Kc p_e + dD_e (M p_e - p_0 m_e).
/// Throws StateError if `model` holds no converged state.
Vector adjoint_objective(const StateModel& model, const Vector& l, const AdjointOptions& options = {});

/// d(se / se_star)/d rho_bar with se = 1/2 u^T K u. The elastic adjoint is u
/// itself; nu = A^{-1} T^T u carries the load term.
Vector adjoint_strain_energy(const StateModel& model, double se_star, const AdjointOptions& options = {});

/// Gradients with respect to the raw design variables for one realization.
struct GradientBundle {
    char realization = 'b';  // 'b' blueprint or 'e' eroded
    Vector df_drho;
    Vector dg1_drho;
    Vector dg2_drho;
};

/// Quantities differenced by the finite-difference oracle.
enum class FdQuantity : int { f_unit = 0, g1 = 1, g2 = 2 };
inline constexpr std::array<const char*, 3> kFdQuantityNames{"f_unit", "g1", "g2"};

using FdEvaluator = std::function<std::array<double, 3>(const Vector&)>;

struct FdResult {
    std::vector<int> variables;
    std::vector<std::array<double, 3>> gradient;  // per variable, per quantity
    double h = 0.0;
    // Rounding floor of the central difference, 64 eps max|q| / h, per quantity.
    std::array<double, 3> noise_floor{};
    std::vector<std::string> warnings;
};

/// Central differences of the evaluator's three outputs with respect to the
/// listed variables. Adds a warning when the estimated rounding floor is more
/// than 1e-3 of the largest difference of a quantity.
FdResult fd_oracle(const FdEvaluator& evaluate, const Vector& x, const std::vector<int>& variables, double h);

/// Relative error |a - fd| / max(|fd|, floor * max_j |fd_j|). The floor keeps
/// near-zero components from dominating.
inline constexpr double kFdRelativeFloor = 1e-4;
double relative_error(double analytic, double fd, double fd_scale);

/// Order of convergence estimated from errors at steps h and h / 2.
double convergence_order(double error_h, double error_half_h);

} // namespace pneutop
