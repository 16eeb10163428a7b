#pragma once

#include "pneutop/constrained_system.hpp"
#include "pneutop/mesh_domain.hpp"
#include "pneutop/types.hpp"

#include <memory>
#include <span>

namespace pneutop {

/// Darcy flow with a density-dependent drainage sink.
///
/// Flow coefficient   K(x) = K_v (1 - (1 - eps) H(x; eta_f, beta_f))
/// Drainage           D(x) = D_s H(x; eta_f, beta_f)
/// with D_s = (ln(1/r) / delta_s)^n K_s, K_s = eps K_v and n the drainage
/// exponent. For n = 2 the 1D solid-medium solution decays as
/// exp(-x ln(1/r) / delta_s), i.e. p(delta_s) = r p_in.
struct FlowParams {
    double K_v = 1.0;
    double epsilon = 1e-7;
    double eta_f = 0.1;
    double beta_f = 10.0;
    double r = 0.1;
    double delta_s = 1.0;
    double p_in = 1.0;
    double p_0 = 0.0;
    int drainage_exponent = 2;

    double K_s() const { return epsilon * K_v; }
    double D_s() const;

    bool operator==(const FlowParams&) const = default;
};

/// Throws ConfigError when a parameter is outside its documented range.
void validate(const FlowParams& params);

struct CoefficientField {
    Vector value;
    Vector derivative;  // with respect to rho_bar
};

CoefficientField flow_coefficient(const Vector& rho_bar, const FlowParams& params);
CoefficientField drainage_coefficient(const Vector& rho_bar, const FlowParams& params);

/// Bilinear element integrals on a square element of edge h, 2x2 Gauss.
struct FlowElementMatrices {
    Matrix conduction;  // int grad N^T grad N
    Matrix mass;        // int N^T N
    Vector load;        // int N
};
FlowElementMatrices flow_element_matrices(double h);

/// int N_u^T grad N_p over one element (8 x 4, 2x2 Gauss). Force F_e = -T_e p_e.
Matrix coupling_element_matrix(double h);

/// Global pressure-to-force operator (num_dofs x num_nodes). F = -T p.
SparseMatrix build_coupling(const DomainModel& domain);

/// Unconstrained global flow matrix A = sum_e K_e Kc + D_e M.
SparseMatrix assemble_flow(const DomainModel& domain, const Vector& K, const Vector& D);

/// Solves A p = b with p = p_in on inlet nodes and p = 0 on ambient nodes.
/// Keeps the factorization so that adjoint solves reuse it.
class PressureSolver {
public:
    PressureSolver(const DomainModel& domain, const FlowParams& params);

    /// Custom Dirichlet node sets (nodes held at p_in / at 0).
    PressureSolver(const DomainModel& domain, const FlowParams& params, std::vector<int> inlet_nodes,
                   std::vector<int> ambient_nodes);

    /// Assembles, factorizes and solves. Throws SolverError on a singular
    /// system or a residual above 1e-10 of the boundary reaction.
    const Vector& solve(const Vector& K, const Vector& D);

    /// Solves A lambda = rhs with homogeneous Dirichlet data, reusing the factorization.
    Vector solve_adjoint(const Vector& rhs) const;

    /// d(A p - b)_e / d rho_bar for element e (4 entries), given dK_e and dD_e.
    void residual_derivative(int e, const Vector& p, double dK, double dD, std::span<double> out) const;

    const Vector& pressure() const { return p_; }
    const ConstrainedSystem& system() const { return system_; }
    const FlowElementMatrices& element_matrices() const { return ref_; }
    const FlowParams& params() const { return params_; }

    /// Residual and reaction norms of the last solve.
    double residual_norm() const { return residual_norm_; }
    double reaction_norm() const { return reaction_norm_; }

private:
    const DomainModel* domain_;
    FlowParams params_;
    FlowElementMatrices ref_;
    std::vector<int> inlet_;
    std::vector<int> ambient_;
    ConstrainedSystem system_;
    Vector p_;
    double residual_norm_ = 0.0;
    double reaction_norm_ = 0.0;
};

} // namespace pneutop
