#pragma once

#include "pneutop/types.hpp"

#include <Eigen/SparseCholesky>

#include <span>
#include <string>
#include <vector>

namespace pneutop {

/// A symmetric system sum_e (a_e A_ref + b_e B_ref) with Dirichlet dofs
/// eliminated symmetrically, on a structured mesh where every element shares
/// the same reference matrices.
///
/// The free-free sparsity pattern and the AMD ordering are computed once;
/// each assemble() only rewrites values, so repeated factorizations of the
/// same mesh are cheap and their results bitwise reproducible.
class ConstrainedSystem {
public:
    ConstrainedSystem(int num_dofs, int dofs_per_element, std::vector<int> element_dofs,
                      std::vector<int> fixed_dofs, std::string label);

    int num_dofs() const { return num_dofs_; }
    int num_free() const { return static_cast<int>(free_dofs_.size()); }
    int num_elements() const { return num_elements_; }
    std::span<const int> element_dofs(int e) const
    {
        return {element_dofs_.data() + static_cast<std::ptrdiff_t>(e) * dofs_per_element_,
                static_cast<std::size_t>(dofs_per_element_)};
    }
    bool is_fixed(int dof) const { return free_index_[static_cast<std::size_t>(dof)] < 0; }
    std::span<const int> fixed_dofs() const { return fixed_dofs_; }

    /// Sets element coefficients. `b` and `ref_b` may be empty.
    void assemble(std::span<const double> a, const Matrix& ref_a, std::span<const double> b = {},
                  const Matrix& ref_b = Matrix());

    /// Adds a lumped term (spring) on the diagonal; applied on every assemble.
    void set_point_stiffness(int dof, double value);

    void factorize();

    /// Solves for a full-length field with the given values at fixed dofs.
    /// `rhs` is the full-length load vector (entries at fixed dofs ignored).
    Vector solve(const Vector& rhs, const Vector& prescribed) const;

    /// Solves with homogeneous Dirichlet data (adjoint solves); the result is
    /// zero at fixed dofs.
    Vector solve_homogeneous(const Vector& rhs) const;

    /// Full (unconstrained) operator applied matrix-free: y = K u.
    Vector multiply(const Vector& u) const;

    /// Unconstrained global matrix (no Dirichlet elimination), for inspection.
    SparseMatrix full_matrix() const;

    /// Reduced free-free matrix as factorized.
    const SparseMatrix& reduced_matrix() const { return reduced_; }

    bool factorized() const { return factorized_; }

    /// Element contribution K_e u_e for element e with the current coefficients.
    void element_product(int e, const Vector& u, std::span<double> out) const;

private:
    int num_dofs_;
    int dofs_per_element_;
    int num_elements_;
    std::vector<int> element_dofs_;
    std::vector<int> fixed_dofs_;
    std::vector<int> free_dofs_;
    std::vector<int> free_index_;
    std::string label_;

    // Position into reduced_.valuePtr() for each (element, i, j) with both
    // dofs free, or -1.
    std::vector<int> scatter_;
    std::vector<std::pair<int, double>> point_terms_;
    std::vector<int> point_slots_;

    std::vector<double> coef_a_;
    std::vector<double> coef_b_;
    Matrix ref_a_;
    Matrix ref_b_;

    SparseMatrix reduced_;
    Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> solver_;
    bool analyzed_ = false;
    bool factorized_ = false;
};

} // namespace pneutop
