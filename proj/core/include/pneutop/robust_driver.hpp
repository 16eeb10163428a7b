#pragma once

#include "pneutop/config.hpp"
#include "pneutop/design_fields.hpp"
#include "pneutop/mesh_domain.hpp"
#include "pneutop/sensitivity.hpp"

#include <algorithm>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace pneutop {

/// Objective, constraints and raw-variable gradients of one design.
struct RobustEvaluation {
    double beta = 1.0;
    double f_b = 0.0;  // l^T u, blueprint
    double f_e = 0.0;  // l^T u, eroded
    double g1 = 0.0;   // blueprint volume / V*
    double g2 = 0.0;   // eroded strain energy / se*
    double se_e = 0.0;
    double se_star = 0.0;
    double grayness = 0.0;  // of the blueprint field
    GradientBundle blueprint;  // df and dg1 filled
    GradientBundle eroded;     // df and dg2 filled
    DesignField field;
    Vector pressure_b, pressure_e;
    Vector displacement_b, displacement_e;

    double f_unit() const { return std::max(f_b, f_e); }
};

/// One row of the optimization history.
struct IterationRecord {
    int iter = 0;
    double beta = 1.0;
    double f_b = 0.0, f_e = 0.0, f_unit = 0.0;
    double g1 = 0.0, g2 = 0.0;
    double grayness = 0.0;
    double change = 0.0;       // max |x_i - x_i^prev| of the MMA step leading here
    double erosion_gap = 0.0;  // max_e (rho_bar_e - rho_bar_b), <= 0 when ordered
};

inline constexpr const char* kHistoryHeader = "iter,beta,f_b,f_e,f_unit,g1,g2,grayness,change,erosion_gap";

/// Blueprint/eroded evaluation pipeline on a fixed mesh.
class RobustProblem {
public:
    explicit RobustProblem(const OptConfig& config);

    const OptConfig& config() const { return config_; }
    const DomainModel& domain() const { return *domain_; }
    const DensityFilter& filter() const { return filter_; }
    int num_variables() const { return domain_->num_design_variables(); }

    /// Uniform V* start.
    Vector initial_design() const;

    /// Full pipeline for both realizations. Without `se_star`, se* is set to
    /// S_f * se_e of this evaluation and reported in the result. With
    /// `gradients` false the adjoint solves are skipped.
    RobustEvaluation evaluate(const Vector& x, double beta, std::optional<double> se_star = std::nullopt,
                              bool gradients = true);

    /// beta for history row `iter` (1-based): beta_init doubled every
    /// beta_interval rows, capped at beta_max.
    double beta_at(int iter) const;

private:
    OptConfig config_;
    std::unique_ptr<DomainModel> domain_;
    DensityFilter filter_;
    std::unique_ptr<StateModel> model_b_, model_e_;
    Vector selector_;
};

struct OptimizationResult {
    Vector x;
    Vector rho_bar_b, rho_bar_e;
    std::vector<IterationRecord> history;
    double se_star = 0.0;
    bool completed = false;
    std::string error;
    std::optional<RobustEvaluation> final_evaluation;
    int mma_relaxed_steps = 0;
    int mma_nonmonotone_steps = 0;
};

/// Called after every evaluation with the design that produced it.
using IterationObserver =
    std::function<void(const IterationRecord&, const RobustEvaluation&, const Vector& x)>;

/// Runs the min-max loop. Solver failures stop the loop; the result then
/// holds the last good design and `error` describes the failure.
OptimizationResult run(const OptConfig& config, const IterationObserver& observer = {});

/// History as CSV, doubles in shortest round-trip form.
std::string history_csv(const std::vector<IterationRecord>& history);

/// State of a given physical density field.
struct Analysis {
    double u_out = 0.0;  // l^T u
    double g1 = 0.0;
    double strain_energy = 0.0;
    bool empty_structure = false;
    Vector pressure;
    Vector displacement;
};

Analysis analyze(const OptConfig& config, const Vector& rho_bar);

/// Evaluator for the finite-difference oracle: (f_unit, g1, g2) at fixed
/// beta and se*. f_unit uses max(f_b, f_e).
FdEvaluator make_fd_evaluator(RobustProblem& problem, double beta, double se_star);

} // namespace pneutop
