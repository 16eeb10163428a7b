#pragma once

#include "pneutop/mesh_domain.hpp"
#include "pneutop/types.hpp"

#include <Eigen/SparseCore>

namespace pneutop {

/// Density filter with linearly decaying (cone) weights.
///
/// Row i of the weight matrix holds v_j * w_ij / sum_k v_k * w_ik for every
/// element j whose centre lies within r_min of element i's centre, where
/// w_ij = max(0, 1 - |x_i - x_j| / r_min). Rows are convex combinations.
class DensityFilter {
public:
    DensityFilter() = default;

    static DensityFilter build(const DomainModel& domain, double r_min);

    /// rho_tilde = W rho.
    Vector apply(const Vector& rho) const;

    /// Pulls a gradient with respect to rho_tilde back to rho: W^T g.
    Vector backward(const Vector& grad_rho_tilde) const;

    const Eigen::SparseMatrix<double, Eigen::RowMajor>& weights() const { return weights_; }
    double radius() const { return r_min_; }
    int size() const { return static_cast<int>(weights_.rows()); }

private:
    Eigen::SparseMatrix<double, Eigen::RowMajor> weights_;
    double r_min_ = 0.0;
};

/// Smoothed Heaviside H(x; eta, beta). H(0) = 0 and H(1) = 1 for any eta, beta.
double heaviside(double x, double eta, double beta);
double heaviside_derivative(double x, double eta, double beta);

struct Projection {
    Vector value;       // rho_bar
    Vector derivative;  // d rho_bar / d rho_tilde, elementwise
};

Projection project(const Vector& rho_tilde, double eta, double beta);

struct SimpParams {
    double E0 = 1e-9;
    double E1 = 1.0;
    double penalty = 3.0;

    bool operator==(const SimpParams&) const = default;
};

struct ModulusField {
    Vector value;       // E
    Vector derivative;  // dE / d rho_bar
};

/// Modified SIMP: E = E0 + rho_bar^p (E1 - E0). Throws ConfigError if E0 >= E1.
ModulusField simp_modulus(const Vector& rho_bar, const SimpParams& params);

/// Measure of non-discreteness, sum 4 x (1 - x) / N. Zero for 0/1 fields.
double grayness(const Vector& rho_bar);

/// Scatters optimizer variables into a full element field; NDS elements get 1
/// and NDV elements 0.
Vector expand_design(const DomainModel& domain, const Vector& x);

/// Keeps only the entries of the design-region elements.
Vector restrict_to_design(const DomainModel& domain, const Vector& full);

/// Overwrites NDS with 1 and NDV with 0; zeroes the projection derivative there.
void enforce_passive(const DomainModel& domain, Projection& projected);

/// The three-field image of a design vector for both robust realizations.
struct DesignField {
    Vector rho;        // full element field, passive entries set
    Vector rho_tilde;
    Projection blueprint;
    Projection eroded;
    double eta_blueprint = 0.5;
    double eta_eroded = 0.6;
    double beta = 1.0;
};

/// Filters and projects x (design-region variables) for the blueprint
/// threshold 0.5 and the eroded threshold 0.5 + delta_eta.
DesignField realize(const DomainModel& domain, const DensityFilter& filter, const Vector& x,
                    double beta, double delta_eta);

} // namespace pneutop
