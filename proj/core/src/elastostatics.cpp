#include "pneutop/elastostatics.hpp"

#include "pneutop/errors.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace pneutop {

namespace {

constexpr double kGauss = 0.57735026918962576451;
constexpr std::array<double, 4> kXi{-1.0, 1.0, 1.0, -1.0};
constexpr std::array<double, 4> kEta{-1.0, -1.0, 1.0, 1.0};

std::vector<int> flat_element_dofs(const DomainModel& d)
{
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(d.num_elements()) * 8);
    for (int e = 0; e < d.num_elements(); ++e)
        for (int dof : d.element_dofs(e)) out.push_back(dof);
    return out;
}

} // namespace

Matrix element_stiffness(double E, double nu, double elem_size)
{
    if (!(nu >= 0.0 && nu < 0.5)) throw ConfigError("Poisson ratio must satisfy 0 <= nu < 0.5");
    if (!(elem_size > 0.0)) throw ConfigError("element size must be positive");

    Eigen::Matrix3d C;
    C << 1.0, nu, 0.0, nu, 1.0, 0.0, 0.0, 0.0, 0.5 * (1.0 - nu);
    C *= E / (1.0 - nu * nu);

    const double h = elem_size;
    const double jac = 0.25 * h * h;
    Matrix ke = Matrix::Zero(8, 8);
    for (double gx : {-kGauss, kGauss}) {
        for (double gy : {-kGauss, kGauss}) {
            Eigen::Matrix<double, 3, 8> B = Eigen::Matrix<double, 3, 8>::Zero();
            for (int a = 0; a < 4; ++a) {
                const auto ua = static_cast<std::size_t>(a);
                const double dx = 0.25 * kXi[ua] * (1.0 + kEta[ua] * gy) * (2.0 / h);
                const double dy = 0.25 * kEta[ua] * (1.0 + kXi[ua] * gx) * (2.0 / h);
                B(0, 2 * a) = dx;
                B(1, 2 * a + 1) = dy;
                B(2, 2 * a) = dy;
                B(2, 2 * a + 1) = dx;
            }
            ke += jac * B.transpose() * C * B;
        }
    }
    return ke;
}

ElasticSolver::ElasticSolver(const DomainModel& domain, double nu)
    : domain_(&domain),
      ke_unit_(element_stiffness(1.0, nu, domain.elem_size())),
      system_(domain.num_dofs(), 8, flat_element_dofs(domain),
              {domain.fixed_dofs().begin(), domain.fixed_dofs().end()}, "elastic")
{
    system_.set_point_stiffness(domain.output_dof(), domain.spring_stiffness());
}

const ElasticState& ElasticSolver::solve(const Vector& E, const Vector& F)
{
    if (E.size() != domain_->num_elements()) throw ShapeError("modulus field must have one entry per element");
    if (F.size() != domain_->num_dofs()) throw ShapeError("force vector must have one entry per dof");

    system_.assemble(std::span<const double>(E.data(), static_cast<std::size_t>(E.size())), ke_unit_);
    system_.factorize();
    state_.u = system_.solve(F, Vector::Zero(domain_->num_dofs()));

    Vector r = system_.multiply(state_.u) - F;
    double res2 = 0.0, f2 = 0.0;
    for (int d = 0; d < domain_->num_dofs(); ++d) {
        if (system_.is_fixed(d)) continue;
        res2 += r[d] * r[d];
        f2 += F[d] * F[d];
    }
    // Rounding floor: stiffness entries times displacement magnitude.
    const double floor = 64.0 * std::numeric_limits<double>::epsilon() * E.cwiseAbs().maxCoeff() *
                         ke_unit_.cwiseAbs().maxCoeff() * state_.u.cwiseAbs().maxCoeff() *
                         std::sqrt(static_cast<double>(domain_->num_dofs()));
    if (std::sqrt(res2) > 1e-9 * std::sqrt(f2) + floor)
        throw SolverError("elastic solve residual " + std::to_string(std::sqrt(res2)) + " exceeds 1e-9 ||F|| = " +
                          std::to_string(1e-9 * std::sqrt(f2)));

    state_.u_out = domain_->output_sign() * state_.u[domain_->output_dof()];
    state_.strain_energy = 0.5 * state_.u.dot(system_.multiply(state_.u));
    return state_;
}

Vector ElasticSolver::solve_adjoint(const Vector& rhs) const { return system_.solve_homogeneous(rhs); }

Vector ElasticSolver::selector() const
{
    Vector l = Vector::Zero(domain_->num_dofs());
    l[domain_->output_dof()] = domain_->output_sign();
    return l;
}

VolumeConstraint volume_constraint(const Vector& rho_bar, const std::vector<double>& volumes, double v_star)
{
    if (static_cast<std::size_t>(rho_bar.size()) != volumes.size())
        throw ShapeError("volume field length does not match density field");
    if (!(v_star > 0.0 && v_star <= 1.0)) throw ConfigError("volume fraction V* must lie in (0, 1]");
    const double total = std::accumulate(volumes.begin(), volumes.end(), 0.0);
    VolumeConstraint out{0.0, Vector(rho_bar.size())};
    double filled = 0.0;
    for (Eigen::Index i = 0; i < rho_bar.size(); ++i) {
        const double v = volumes[static_cast<std::size_t>(i)];
        filled += v * rho_bar[i];
        out.gradient[i] = v / (v_star * total);
    }
    out.value = filled / total / v_star;
    return out;
}

double strain_energy_constraint(double se_e, double se_star)
{
    if (!(se_star > 0.0)) throw StateError("strain energy reference se* has not been initialized");
    return se_e / se_star;
}

} // namespace pneutop
