#pragma once

#include "pneutop/types.hpp"

#include <vector>

namespace pneutop {

/// Method of Moving Asymptotes (Svanberg 1987) with the primal-dual interior
/// point subproblem solver of the reference implementation.
///
/// Solves  min f0(x) + a0 z + sum_i (c_i y_i + d_i y_i^2 / 2)
///         s.t. f_i(x) - a_i z - y_i <= 0,  xmin <= x <= xmax,  y, z >= 0
/// by successive convex separable approximations.
struct MmaParams {
    double asyinit = 0.5;   // initial asymptote distance, fraction of the box
    double asydecr = 0.7;   // shrink factor when a variable oscillates
    double asyincr = 1.2;   // growth factor when it moves monotonically
    double albefa = 0.1;    // subproblem bounds keep this fraction off the asymptotes
    double asymin = 0.01;   // closest an adapted asymptote may get, fraction of the box
    double asymax = 10.0;   // farthest an adapted asymptote may get, fraction of the box
    double move = 0.1;      // external move limit, fraction of the box
    double raa0 = 1e-5;
    double c = 1000.0;      // penalty on the relaxation variables y
    double d = 1.0;
    double epsimin = 1e-10; // last barrier level of the subproblem solver

    bool operator==(const MmaParams&) const = default;
};

/// Throws ConfigError for values outside the usable range.
void validate(const MmaParams& params);

struct MmaStep {
    Vector x;
    Vector y;              // relaxation variables, one per constraint row
    double z = 0.0;
    Vector lambda;         // subproblem multipliers
    bool relaxed = false;  // some y_i > 1e-6: the subproblem was infeasible
    int barrier_levels = 0;
    int newton_iterations = 0;
    // Max-norm of the unperturbed KKT residual of the subproblem at the returned point.
    double kkt_residual = 0.0;
    // True when the residual norm did not increase across any accepted
    // Newton step of any barrier level.
    bool residual_monotone = true;
};

class MmaOptimizer {
public:
    /// n variables, m constraint rows, box [xmin, xmax], per-row a_i, weight a0.
    MmaOptimizer(int n, int m, Vector xmin, Vector xmax, Vector a, double a0 = 1.0, MmaParams params = {});

    /// One outer update. dfdx is m x n.
    MmaStep update(const Vector& x, const Vector& df0dx, const Vector& fval, const Matrix& dfdx);

    int iteration() const { return iter_; }
    const Vector& lower_asymptote() const { return low_; }
    const Vector& upper_asymptote() const { return upp_; }
    const MmaParams& params() const { return params_; }
    int num_variables() const { return n_; }
    int num_constraints() const { return m_; }

private:
    int n_, m_;
    Vector xmin_, xmax_, a_;
    double a0_;
    MmaParams params_;
    int iter_ = 0;
    Vector xold1_, xold2_, low_, upp_;
};

/// min_x max_k f_k(x) s.t. g_j(x) <= 0 on [xmin, xmax], via a bound
/// variable z: rows f_k + s - z <= 0 (a_k = 1) and g_j <= 0 (a_j = 0).
/// The shift s keeps every objective row positive over the move box so the
/// bound z >= 0 never binds; it leaves the minimizer unchanged.
class MinMaxMma {
public:
    MinMaxMma(int n, int num_objectives, int num_constraints, Vector xmin, Vector xmax, MmaParams params = {});

    /// f: objective values, df: their gradients; g, dg: constraints in <= 0 form.
    MmaStep update(const Vector& x, const std::vector<double>& f, const std::vector<Vector>& df,
                   const std::vector<double>& g, const std::vector<Vector>& dg);

    double last_shift() const { return shift_; }
    const MmaOptimizer& optimizer() const { return mma_; }

private:
    int num_objectives_, num_constraints_;
    Vector range_;
    MmaOptimizer mma_;
    double shift_ = 0.0;
};

} // namespace pneutop
