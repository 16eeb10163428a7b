#include "pneutop/design_fields.hpp"

#include "pneutop/errors.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace pneutop {

DensityFilter DensityFilter::build(const DomainModel& domain, double r_min)
{
    if (!(r_min > 0.0)) throw ConfigError("filter radius r_min must be positive");

    const int nelx = domain.nelx(), nely = domain.nely();
    const double h = domain.elem_size();
    const int reach = static_cast<int>(std::ceil(r_min / h));

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(domain.num_elements()) *
                     static_cast<std::size_t>((2 * reach + 1) * (2 * reach + 1)));

    std::vector<std::pair<int, double>> row;
    for (int ex = 0; ex < nelx; ++ex) {
        for (int ey = 0; ey < nely; ++ey) {
            row.clear();
            double sum = 0.0;
            const int i = domain.element_index(ex, ey);
            // Column-major neighbour scan keeps the summation order fixed.
            for (int jx = std::max(0, ex - reach); jx <= std::min(nelx - 1, ex + reach); ++jx) {
                for (int jy = std::max(0, ey - reach); jy <= std::min(nely - 1, ey + reach); ++jy) {
                    const double dist = h * std::hypot(ex - jx, ey - jy);
                    if (dist > r_min) continue;
                    const double w = domain.element_volume() * std::max(0.0, 1.0 - dist / r_min);
                    const int j = domain.element_index(jx, jy);
                    row.emplace_back(j, w);
                    sum += w;
                }
            }
            for (const auto& [j, w] : row) triplets.emplace_back(i, j, w / sum);
        }
    }

    DensityFilter f;
    f.r_min_ = r_min;
    f.weights_.resize(domain.num_elements(), domain.num_elements());
    f.weights_.setFromTriplets(triplets.begin(), triplets.end());
    f.weights_.makeCompressed();
    return f;
}

Vector DensityFilter::apply(const Vector& rho) const
{
    if (rho.size() != weights_.cols())
        throw ShapeError("filter input has " + std::to_string(rho.size()) + " entries, expected " +
                         std::to_string(weights_.cols()));
    return weights_ * rho;
}

Vector DensityFilter::backward(const Vector& grad_rho_tilde) const
{
    if (grad_rho_tilde.size() != weights_.rows())
        throw ShapeError("filter gradient has " + std::to_string(grad_rho_tilde.size()) +
                         " entries, expected " + std::to_string(weights_.rows()));
    return weights_.transpose() * grad_rho_tilde;
}

double heaviside(double x, double eta, double beta)
{
    const double a = std::tanh(beta * eta);
    return (a + std::tanh(beta * (x - eta))) / (a + std::tanh(beta * (1.0 - eta)));
}

double heaviside_derivative(double x, double eta, double beta)
{
    const double t = std::tanh(beta * (x - eta));
    return beta * (1.0 - t * t) / (std::tanh(beta * eta) + std::tanh(beta * (1.0 - eta)));
}

Projection project(const Vector& rho_tilde, double eta, double beta)
{
    Projection out{Vector(rho_tilde.size()), Vector(rho_tilde.size())};
    for (Eigen::Index i = 0; i < rho_tilde.size(); ++i) {
        out.value[i] = heaviside(rho_tilde[i], eta, beta);
        out.derivative[i] = heaviside_derivative(rho_tilde[i], eta, beta);
    }
    return out;
}

ModulusField simp_modulus(const Vector& rho_bar, const SimpParams& params)
{
    if (!(params.E0 < params.E1)) throw ConfigError("SIMP requires E0 < E1");
    if (params.penalty < 1.0) throw ConfigError("SIMP penalty must be >= 1");
    ModulusField out{Vector(rho_bar.size()), Vector(rho_bar.size())};
    const double span = params.E1 - params.E0;
    for (Eigen::Index i = 0; i < rho_bar.size(); ++i) {
        const double x = rho_bar[i];
        out.value[i] = params.E0 + std::pow(x, params.penalty) * span;
        out.derivative[i] = params.penalty * std::pow(x, params.penalty - 1.0) * span;
    }
    return out;
}

double grayness(const Vector& rho_bar)
{
    if (rho_bar.size() == 0) return 0.0;
    double sum = 0.0;
    for (double x : rho_bar) sum += 4.0 * x * (1.0 - x);
    return sum / static_cast<double>(rho_bar.size());
}

Vector expand_design(const DomainModel& domain, const Vector& x)
{
    if (x.size() != domain.num_design_variables())
        throw ShapeError("design vector has " + std::to_string(x.size()) + " entries, expected " +
                         std::to_string(domain.num_design_variables()));
    Vector full(domain.num_elements());
    for (int e = 0; e < domain.num_elements(); ++e)
        full[e] = domain.region(e) == Region::solid ? 1.0 : 0.0;
    const auto design = domain.design_elements();
    for (std::size_t k = 0; k < design.size(); ++k) full[design[k]] = x[static_cast<Eigen::Index>(k)];
    return full;
}

Vector restrict_to_design(const DomainModel& domain, const Vector& full)
{
    if (full.size() != domain.num_elements())
        throw ShapeError("element field has " + std::to_string(full.size()) + " entries, expected " +
                         std::to_string(domain.num_elements()));
    const auto design = domain.design_elements();
    Vector x(static_cast<Eigen::Index>(design.size()));
    for (std::size_t k = 0; k < design.size(); ++k) x[static_cast<Eigen::Index>(k)] = full[design[k]];
    return x;
}

void enforce_passive(const DomainModel& domain, Projection& projected)
{
    for (int e = 0; e < domain.num_elements(); ++e) {
        const Region r = domain.region(e);
        if (r == Region::design) continue;
        projected.value[e] = r == Region::solid ? 1.0 : 0.0;
        projected.derivative[e] = 0.0;
    }
}

DesignField realize(const DomainModel& domain, const DensityFilter& filter, const Vector& x,
                    double beta, double delta_eta)
{
    DesignField f;
    f.beta = beta;
    f.eta_blueprint = 0.5;
    f.eta_eroded = 0.5 + delta_eta;
    f.rho = expand_design(domain, x);
    f.rho_tilde = filter.apply(f.rho);
    f.blueprint = project(f.rho_tilde, f.eta_blueprint, beta);
    f.eroded = project(f.rho_tilde, f.eta_eroded, beta);
    // Filter rounding can leave rho_tilde an ulp above 1, where the two
    // projections may come out in the wrong order by an ulp.
    f.eroded.value = f.eroded.value.cwiseMin(f.blueprint.value);
    enforce_passive(domain, f.blueprint);
    enforce_passive(domain, f.eroded);
    return f;
}

} // namespace pneutop
