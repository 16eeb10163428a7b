#pragma once

#include "pneutop/constrained_system.hpp"
#include "pneutop/mesh_domain.hpp"
#include "pneutop/types.hpp"

namespace pneutop {

/// Plane-stress bilinear quad stiffness (unit thickness, square element of
/// edge elem_size, 2x2 Gauss). Throws ConfigError unless 0 <= nu < 0.5.
Matrix element_stiffness(double E, double nu, double elem_size);

struct ElasticState {
    Vector u;
    double u_out = 0.0;          // l^T u
    double strain_energy = 0.0;  // 1/2 u^T K u, K including the output spring
};

/// Linear elastic solve with the output spring added on the output dof.
/// Factorization is kept for adjoint solves.
class ElasticSolver {
public:
    ElasticSolver(const DomainModel& domain, double nu);

    /// Assembles K(E), factorizes and solves K u = F. Throws SolverError if
    /// the residual exceeds 1e-9 ||F||.
    const ElasticState& solve(const Vector& E, const Vector& F);

    /// K^{-1} rhs with homogeneous Dirichlet data.
    Vector solve_adjoint(const Vector& rhs) const;

    /// Output selector l: one entry (+-1) at the output dof.
    Vector selector() const;

    const ElasticState& state() const { return state_; }
    const Matrix& unit_stiffness() const { return ke_unit_; }
    const ConstrainedSystem& system() const { return system_; }
    const DomainModel& domain() const { return *domain_; }

private:
    const DomainModel* domain_;
    Matrix ke_unit_;
    ConstrainedSystem system_;
    ElasticState state_;
};

struct VolumeConstraint {
    double value = 0.0;  // g1 = (sum v rho_bar / sum v) / V*
    Vector gradient;     // d g1 / d rho_bar
};

VolumeConstraint volume_constraint(const Vector& rho_bar, const std::vector<double>& volumes, double v_star);

/// g2 = se_e / se*. Throws StateError when se* has not been frozen (<= 0 or NaN).
double strain_energy_constraint(double se_e, double se_star);

} // namespace pneutop
