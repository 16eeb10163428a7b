#include "pneutop/robust_driver.hpp"

#include "pneutop/elastostatics.hpp"
#include "pneutop/errors.hpp"
#include "pneutop/mma.hpp"
#include "pneutop/parallel.hpp"

#include <cmath>
#include <future>
#include <sstream>

namespace pneutop {

RobustProblem::RobustProblem(const OptConfig& config) : config_(config)
{
    validate(config_);
    domain_ = std::make_unique<DomainModel>(build_domain(config_.domain));
    filter_ = DensityFilter::build(*domain_, config_.filter_radius());
    const PhysicsParams physics = config_.physics();
    model_b_ = std::make_unique<StateModel>(*domain_, physics);
    model_e_ = std::make_unique<StateModel>(*domain_, physics);
    selector_ = model_b_->elastic_solver().selector();
}

Vector RobustProblem::initial_design() const
{
    return Vector::Constant(num_variables(), config_.optimization.v_star);
}

double RobustProblem::beta_at(int iter) const
{
    const auto& o = config_.optimization;
    const int doublings = std::max(0, iter - 1) / o.beta_interval;
    double beta = o.beta_init;
    for (int k = 0; k < doublings && beta < o.beta_max; ++k) beta *= 2.0;
    return std::min(beta, o.beta_max);
}

namespace {

Vector chain_to_design(const DomainModel& domain, const DensityFilter& filter, const Vector& g_rho_bar,
                       const Projection& projection)
{
    return restrict_to_design(domain, filter.backward(g_rho_bar.cwiseProduct(projection.derivative)));
}

} // namespace

RobustEvaluation RobustProblem::evaluate(const Vector& x, double beta, std::optional<double> se_star,
                                         bool gradients)
{
    if (x.size() != num_variables())
        throw ShapeError("design vector has " + std::to_string(x.size()) + " entries, expected " +
                         std::to_string(num_variables()));
    if ((x.array() < 0.0).any() || (x.array() > 1.0).any()) throw ShapeError("design variables must lie in [0, 1]");

    RobustEvaluation ev;
    ev.beta = beta;
    ev.field = realize(*domain_, filter_, x, beta, config_.optimization.delta_eta);

    auto solve = [](StateModel& model, const Vector& rho_bar, const char* tag) {
        try {
            model.solve(rho_bar);
        } catch (const SolverError& e) {
            throw SolverError(std::string(tag) + " realization: " + e.what());
        }
    };
    if (num_threads() > 1) {
        auto eroded = std::async(std::launch::async, solve, std::ref(*model_e_), std::cref(ev.field.eroded.value), "eroded");
        solve(*model_b_, ev.field.blueprint.value, "blueprint");
        eroded.get();
    } else {
        solve(*model_b_, ev.field.blueprint.value, "blueprint");
        solve(*model_e_, ev.field.eroded.value, "eroded");
    }

    const auto& sb = model_b_->state();
    const auto& se = model_e_->state();
    ev.f_b = sb.u_out;
    ev.f_e = se.u_out;
    const auto volume = volume_constraint(ev.field.blueprint.value, domain_->element_volumes(),
                                          config_.optimization.v_star);
    ev.g1 = volume.value;
    ev.se_e = se.strain_energy;
    ev.se_star = se_star.value_or(config_.optimization.s_f * se.strain_energy);
    ev.g2 = strain_energy_constraint(ev.se_e, ev.se_star);
    ev.grayness = grayness(ev.field.blueprint.value);
    ev.pressure_b = sb.pressure;
    ev.pressure_e = se.pressure;
    ev.displacement_b = sb.displacement;
    ev.displacement_e = se.displacement;
    ev.blueprint.realization = 'b';
    ev.eroded.realization = 'e';
    if (!gradients) return ev;

    const AdjointOptions options{config_.optimization.load_sensitivity};
    auto blueprint_gradients = [&] {
        ev.blueprint.df_drho = chain_to_design(*domain_, filter_, adjoint_objective(*model_b_, selector_, options),
                                               ev.field.blueprint);
        ev.blueprint.dg1_drho = chain_to_design(*domain_, filter_, volume.gradient, ev.field.blueprint);
    };
    auto eroded_gradients = [&] {
        ev.eroded.df_drho = chain_to_design(*domain_, filter_, adjoint_objective(*model_e_, selector_, options),
                                            ev.field.eroded);
        ev.eroded.dg2_drho = chain_to_design(*domain_, filter_, adjoint_strain_energy(*model_e_, ev.se_star, options),
                                             ev.field.eroded);
    };
    if (num_threads() > 1) {
        auto eroded = std::async(std::launch::async, eroded_gradients);
        blueprint_gradients();
        eroded.get();
    } else {
        blueprint_gradients();
        eroded_gradients();
    }
    return ev;
}

OptimizationResult run(const OptConfig& config, const IterationObserver& observer)
{
    RobustProblem problem(config);
    const auto& o = config.optimization;
    const int n = problem.num_variables();

    OptimizationResult result;
    Vector x = problem.initial_design();
    Vector x_prev = x;
    MinMaxMma mma(n, 2, 2, Vector::Zero(n), Vector::Ones(n), config.mma);
    std::optional<double> se_star;

    for (int iter = 1; iter <= o.max_iter + 1; ++iter) {
        const double beta = problem.beta_at(iter);
        RobustEvaluation ev;
        try {
            ev = problem.evaluate(x, beta, se_star);
        } catch (const SolverError& e) {
            result.error = "iteration " + std::to_string(iter) + ": " + e.what();
            break;
        }
        if (!se_star) {
            se_star = ev.se_star;
            result.se_star = *se_star;
        }

        IterationRecord rec;
        rec.iter = iter;
        rec.beta = beta;
        rec.f_b = ev.f_b;
        rec.f_e = ev.f_e;
        rec.f_unit = ev.f_unit();
        rec.g1 = ev.g1;
        rec.g2 = ev.g2;
        rec.grayness = ev.grayness;
        rec.change = iter == 1 ? 0.0 : (x - x_prev).cwiseAbs().maxCoeff();
        rec.erosion_gap = (ev.field.eroded.value - ev.field.blueprint.value).maxCoeff();
        result.history.push_back(rec);
        if (observer) observer(rec, ev, x);

        result.x = x;
        result.rho_bar_b = ev.field.blueprint.value;
        result.rho_bar_e = ev.field.eroded.value;

        const bool last = iter == o.max_iter + 1;
        const bool settled = o.early_exit && iter > 1 && rec.change < 1e-3 && beta >= o.beta_max &&
                             rec.g1 <= 1.0 + 1e-3 && rec.g2 <= 1.0 + 1e-3;
        if (last || settled) {
            result.final_evaluation = std::move(ev);
            break;
        }

        // Objective rows are normalized by the current magnitude, so the
        // relaxation penalty c keeps its weight however far |f| grows.
        double objective_ref = std::max(std::abs(ev.f_b), std::abs(ev.f_e));
        if (!(objective_ref > 0.0)) objective_ref = 1.0;
        const double scale = o.objective_scale / objective_ref;
        const auto step = mma.update(x, {scale * ev.f_b, scale * ev.f_e},
                                     {scale * ev.blueprint.df_drho, scale * ev.eroded.df_drho},
                                     {ev.g1 - 1.0, ev.g2 - 1.0}, {ev.blueprint.dg1_drho, ev.eroded.dg2_drho});
        if (step.relaxed) ++result.mma_relaxed_steps;
        if (!step.residual_monotone) ++result.mma_nonmonotone_steps;
        if (!step.x.allFinite()) {
            result.error = "iteration " + std::to_string(iter) + ": MMA returned a non-finite design";
            break;
        }
        x_prev = x;
        x = step.x;
        result.final_evaluation = std::move(ev);
    }
    result.completed = result.error.empty();
    return result;
}

std::string history_csv(const std::vector<IterationRecord>& history)
{
    std::ostringstream os;
    os << kHistoryHeader << '\n';
    for (const auto& r : history) {
        os << r.iter << ',' << format_double(r.beta) << ',' << format_double(r.f_b) << ',' << format_double(r.f_e)
           << ',' << format_double(r.f_unit) << ',' << format_double(r.g1) << ',' << format_double(r.g2) << ','
           << format_double(r.grayness) << ',' << format_double(r.change) << ',' << format_double(r.erosion_gap)
           << '\n';
    }
    return os.str();
}

Analysis analyze(const OptConfig& config, const Vector& rho_bar)
{
    validate(config);
    const DomainModel domain = build_domain(config.domain);
    if (rho_bar.size() != domain.num_elements())
        throw ShapeError("density field has " + std::to_string(rho_bar.size()) + " entries, expected " +
                         std::to_string(domain.num_elements()));
    if ((rho_bar.array() < 0.0).any() || (rho_bar.array() > 1.0).any())
        throw ShapeError("density values must lie in [0, 1]");

    StateModel model(domain, config.physics());
    const auto& s = model.solve(rho_bar);
    Analysis a;
    a.u_out = s.u_out;
    a.g1 = volume_constraint(rho_bar, domain.element_volumes(), config.optimization.v_star).value;
    a.strain_energy = s.strain_energy;
    a.empty_structure = s.empty_structure;
    a.pressure = s.pressure;
    a.displacement = s.displacement;
    return a;
}

FdEvaluator make_fd_evaluator(RobustProblem& problem, double beta, double se_star)
{
    return [&problem, beta, se_star](const Vector& x) {
        const auto ev = problem.evaluate(x, beta, se_star, false);
        return std::array<double, 3>{ev.f_unit(), ev.g1, ev.g2};
    };
}

} // namespace pneutop
