#include "pneutop/sensitivity.hpp"

#include "pneutop/errors.hpp"
#include "pneutop/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace pneutop {

StateModel::StateModel(const DomainModel& domain, const PhysicsParams& params)
    : domain_(&domain),
      params_(params),
      coupling_(build_coupling(domain)),
      pressure_(domain, params.flow),
      elastic_(domain, params.nu)
{
}

const PhysicalState& StateModel::solve(const Vector& rho_bar)
{
    const auto& d = *domain_;
    if (rho_bar.size() != d.num_elements()) throw ShapeError("density field must have one entry per element");
    if (!rho_bar.allFinite()) throw ShapeError("density field contains non-finite values");

    state_.valid = false;
    state_.rho_bar = rho_bar;
    state_.modulus = simp_modulus(rho_bar, params_.simp);
    state_.flow = flow_coefficient(rho_bar, params_.flow);
    state_.drainage = drainage_coefficient(rho_bar, params_.flow);
    state_.pressure = pressure_.solve(state_.flow.value, state_.drainage.value);
    state_.force = -(coupling_ * state_.pressure);

    state_.empty_structure = rho_bar.cwiseAbs().maxCoeff() == 0.0;
    if (state_.empty_structure) {
        state_.displacement = Vector::Zero(d.num_dofs());
        state_.u_out = 0.0;
        state_.strain_energy = 0.0;
    } else {
        const auto& es = elastic_.solve(state_.modulus.value, state_.force);
        state_.displacement = es.u;
        state_.u_out = es.u_out;
        state_.strain_energy = es.strain_energy;
    }
    state_.valid = true;
    return state_;
}

namespace {

void require_state(const StateModel& model)
{
    if (!model.state().valid) throw StateError("adjoint requested without a converged state");
}

// Element-local assembly of  -c dE_e a_e^T k0 b_e + mu_e^T dR_e.
Vector element_sensitivity(const StateModel& model, const Vector& a, const Vector& b, double c,
                           const Vector* mu)
{
    const auto& d = model.domain();
    const auto& s = model.state();
    const Matrix& k0 = model.elastic_solver().unit_stiffness();
    Vector out(d.num_elements());
    parallel_for(static_cast<std::size_t>(d.num_elements()), [&](std::size_t i) {
        const int e = static_cast<int>(i);
        const auto dofs = d.element_dofs(e);
        Eigen::Matrix<double, 8, 1> ae, be;
        for (int k = 0; k < 8; ++k) {
            ae[k] = a[dofs[static_cast<std::size_t>(k)]];
            be[k] = b[dofs[static_cast<std::size_t>(k)]];
        }
        double g = -c * s.modulus.derivative[e] * ae.dot(k0 * be);
        if (mu != nullptr) {
            std::array<double, 4> dr{};
            model.pressure_solver().residual_derivative(e, s.pressure, s.flow.derivative[e],
                                                        s.drainage.derivative[e], dr);
            const auto nodes = d.element_nodes(e);
            for (int k = 0; k < 4; ++k)
                g += (*mu)[nodes[static_cast<std::size_t>(k)]] * dr[static_cast<std::size_t>(k)];
        }
        out[e] = g;
    });
    return out;
}

} // namespace

Vector adjoint_objective(const StateModel& model, const Vector& l, const AdjointOptions& options)
{
    require_state(model);
    const auto& d = model.domain();
    if (l.size() != d.num_dofs()) throw ShapeError("selector must have one entry per dof");
    if (model.state().empty_structure) return Vector::Zero(d.num_elements());

    const Vector w = model.elastic_solver().solve_adjoint(l);
    if (!options.include_load_term) return element_sensitivity(model, w, model.state().displacement, 1.0, nullptr);
    const Vector mu = model.pressure_solver().solve_adjoint(model.coupling().transpose() * w);
    return element_sensitivity(model, w, model.state().displacement, 1.0, &mu);
}

Vector adjoint_strain_energy(const StateModel& model, double se_star, const AdjointOptions& options)
{
    require_state(model);
    if (!(se_star > 0.0)) throw StateError("strain energy reference se* has not been initialized");
    const auto& d = model.domain();
    if (model.state().empty_structure) return Vector::Zero(d.num_elements());

    const Vector& u = model.state().displacement;
    Vector g;
    if (options.include_load_term) {
        const Vector nu = model.pressure_solver().solve_adjoint(model.coupling().transpose() * u);
        g = element_sensitivity(model, u, u, 0.5, &nu);
    } else {
        g = element_sensitivity(model, u, u, 0.5, nullptr);
    }
    return g / se_star;
}

FdResult fd_oracle(const FdEvaluator& evaluate, const Vector& x, const std::vector<int>& variables, double h)
{
    if (!(h > 0.0)) throw ConfigError("finite-difference step must be positive");
    FdResult out;
    out.variables = variables;
    out.h = h;
    out.gradient.resize(variables.size());

    std::array<double, 3> scale{};
    const auto base = evaluate(x);
    for (int q = 0; q < 3; ++q) scale[static_cast<std::size_t>(q)] = std::abs(base[static_cast<std::size_t>(q)]);

    Vector xp = x;
    for (std::size_t k = 0; k < variables.size(); ++k) {
        const int i = variables[k];
        if (i < 0 || i >= x.size()) throw ShapeError("finite-difference variable index out of range");
        xp[i] = x[i] + h;
        const auto fp = evaluate(xp);
        xp[i] = x[i] - h;
        const auto fm = evaluate(xp);
        xp[i] = x[i];
        for (std::size_t q = 0; q < 3; ++q) {
            out.gradient[k][q] = (fp[q] - fm[q]) / (2.0 * h);
            scale[q] = std::max({scale[q], std::abs(fp[q]), std::abs(fm[q])});
        }
    }

    for (std::size_t q = 0; q < 3; ++q) {
        out.noise_floor[q] = 64.0 * std::numeric_limits<double>::epsilon() * scale[q] / h;
        double gmax = 0.0;
        for (const auto& g : out.gradient) gmax = std::max(gmax, std::abs(g[q]));
        if (gmax > 0.0 && out.noise_floor[q] > 1e-3 * gmax) {
            std::ostringstream msg;
            msg << "step h = " << h << " is too small for " << kFdQuantityNames[q] << ": rounding floor "
                << out.noise_floor[q] << " vs largest difference " << gmax;
            out.warnings.push_back(msg.str());
        }
    }
    return out;
}

double relative_error(double analytic, double fd, double fd_scale)
{
    const double denom = std::max(std::abs(fd), kFdRelativeFloor * fd_scale);
    if (denom == 0.0) return analytic == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return std::abs(analytic - fd) / denom;
}

double convergence_order(double error_h, double error_half_h)
{
    if (!(error_h > 0.0) || !(error_half_h > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    return std::log2(error_h / error_half_h);
}

} // namespace pneutop
