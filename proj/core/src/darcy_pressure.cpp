#include "pneutop/darcy_pressure.hpp"

#include "pneutop/design_fields.hpp"
#include "pneutop/errors.hpp"

#include <array>
#include <cmath>
#include <limits>

namespace pneutop {

namespace {

constexpr double kGauss = 0.57735026918962576451;  // 1/sqrt(3)

// Reference square [-1,1]^2, node order (-,-), (+,-), (+,+), (-,+).
constexpr std::array<double, 4> kXi{-1.0, 1.0, 1.0, -1.0};
constexpr std::array<double, 4> kEta{-1.0, -1.0, 1.0, 1.0};

std::vector<int> flat_element_nodes(const DomainModel& d)
{
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(d.num_elements()) * 4);
    for (int e = 0; e < d.num_elements(); ++e)
        for (int n : d.element_nodes(e)) out.push_back(n);
    return out;
}

std::vector<int> merge(const std::vector<int>& a, const std::vector<int>& b)
{
    std::vector<int> out = a;
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

} // namespace

double FlowParams::D_s() const
{
    const double rate = std::log(1.0 / r) / delta_s;
    return std::pow(rate, drainage_exponent) * K_s();
}

void validate(const FlowParams& p)
{
    if (!(p.K_v > 0.0)) throw ConfigError("flow.K_v must be positive");
    if (!(p.epsilon > 0.0 && p.epsilon < 1.0)) throw ConfigError("flow.epsilon must lie in (0, 1)");
    if (!(p.eta_f > 0.0 && p.eta_f < 1.0)) throw ConfigError("flow.eta_f must lie in (0, 1)");
    if (!(p.beta_f >= 1.0)) throw ConfigError("flow.beta_f must be >= 1");
    if (!(p.r >= 0.001 && p.r <= 0.1)) throw ConfigError("flow.r must lie in [0.001, 0.1]");
    if (!(p.delta_s > 0.0)) throw ConfigError("flow.delta_s must be positive");
    if (p.drainage_exponent != 1 && p.drainage_exponent != 2)
        throw ConfigError("flow.drainage_exponent must be 1 or 2");
    if (!std::isfinite(p.p_in) || !std::isfinite(p.p_0)) throw ConfigError("flow pressures must be finite");
}

CoefficientField flow_coefficient(const Vector& rho_bar, const FlowParams& params)
{
    CoefficientField out{Vector(rho_bar.size()), Vector(rho_bar.size())};
    const double span = params.K_v * (1.0 - params.epsilon);
    for (Eigen::Index i = 0; i < rho_bar.size(); ++i) {
        const double h = heaviside(rho_bar[i], params.eta_f, params.beta_f);
        out.value[i] = params.K_v - span * h;
        out.derivative[i] = -span * heaviside_derivative(rho_bar[i], params.eta_f, params.beta_f);
    }
    return out;
}

CoefficientField drainage_coefficient(const Vector& rho_bar, const FlowParams& params)
{
    if (!(params.r >= 0.001 && params.r <= 0.1)) throw ConfigError("flow.r must lie in [0.001, 0.1]");
    CoefficientField out{Vector(rho_bar.size()), Vector(rho_bar.size())};
    const double ds = params.D_s();
    for (Eigen::Index i = 0; i < rho_bar.size(); ++i) {
        out.value[i] = ds * heaviside(rho_bar[i], params.eta_f, params.beta_f);
        out.derivative[i] = ds * heaviside_derivative(rho_bar[i], params.eta_f, params.beta_f);
    }
    return out;
}

FlowElementMatrices flow_element_matrices(double h)
{
    FlowElementMatrices m{Matrix::Zero(4, 4), Matrix::Zero(4, 4), Vector::Zero(4)};
    const double jac = 0.25 * h * h;  // det of the reference-to-physical map
    for (double gx : {-kGauss, kGauss}) {
        for (double gy : {-kGauss, kGauss}) {
            Eigen::Vector4d N, dNdx, dNdy;
            for (int a = 0; a < 4; ++a) {
                const auto ua = static_cast<std::size_t>(a);
                N[a] = 0.25 * (1.0 + kXi[ua] * gx) * (1.0 + kEta[ua] * gy);
                dNdx[a] = 0.25 * kXi[ua] * (1.0 + kEta[ua] * gy) * (2.0 / h);
                dNdy[a] = 0.25 * kEta[ua] * (1.0 + kXi[ua] * gx) * (2.0 / h);
            }
            m.conduction += jac * (dNdx * dNdx.transpose() + dNdy * dNdy.transpose());
            m.mass += jac * (N * N.transpose());
            m.load += jac * N;
        }
    }
    return m;
}

Matrix coupling_element_matrix(double h)
{
    Matrix t = Matrix::Zero(8, 4);
    const double jac = 0.25 * h * h;
    for (double gx : {-kGauss, kGauss}) {
        for (double gy : {-kGauss, kGauss}) {
            Eigen::Vector4d N, dNdx, dNdy;
            for (int a = 0; a < 4; ++a) {
                const auto ua = static_cast<std::size_t>(a);
                N[a] = 0.25 * (1.0 + kXi[ua] * gx) * (1.0 + kEta[ua] * gy);
                dNdx[a] = 0.25 * kXi[ua] * (1.0 + kEta[ua] * gy) * (2.0 / h);
                dNdy[a] = 0.25 * kEta[ua] * (1.0 + kXi[ua] * gx) * (2.0 / h);
            }
            for (int a = 0; a < 4; ++a)
                for (int b = 0; b < 4; ++b) {
                    t(2 * a, b) += jac * N[a] * dNdx[b];
                    t(2 * a + 1, b) += jac * N[a] * dNdy[b];
                }
        }
    }
    return t;
}

SparseMatrix build_coupling(const DomainModel& domain)
{
    const Matrix te = coupling_element_matrix(domain.elem_size());
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<std::size_t>(domain.num_elements()) * 32);
    for (int e = 0; e < domain.num_elements(); ++e) {
        const auto dofs = domain.element_dofs(e);
        const auto nodes = domain.element_nodes(e);
        for (int i = 0; i < 8; ++i)
            for (int j = 0; j < 4; ++j)
                t.emplace_back(dofs[static_cast<std::size_t>(i)], nodes[static_cast<std::size_t>(j)], te(i, j));
    }
    SparseMatrix T(domain.num_dofs(), domain.num_nodes());
    T.setFromTriplets(t.begin(), t.end());
    return T;
}

SparseMatrix assemble_flow(const DomainModel& domain, const Vector& K, const Vector& D)
{
    if (K.size() != domain.num_elements() || D.size() != domain.num_elements())
        throw ShapeError("flow coefficients must have one entry per element");
    const auto ref = flow_element_matrices(domain.elem_size());
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<std::size_t>(domain.num_elements()) * 16);
    for (int e = 0; e < domain.num_elements(); ++e) {
        const auto nodes = domain.element_nodes(e);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                t.emplace_back(nodes[static_cast<std::size_t>(i)], nodes[static_cast<std::size_t>(j)],
                               K[e] * ref.conduction(i, j) + D[e] * ref.mass(i, j));
    }
    SparseMatrix A(domain.num_nodes(), domain.num_nodes());
    A.setFromTriplets(t.begin(), t.end());
    return A;
}

PressureSolver::PressureSolver(const DomainModel& domain, const FlowParams& params)
    : PressureSolver(domain, params, {domain.inlet_nodes().begin(), domain.inlet_nodes().end()},
                     {domain.ambient_nodes().begin(), domain.ambient_nodes().end()})
{
}

PressureSolver::PressureSolver(const DomainModel& domain, const FlowParams& params, std::vector<int> inlet_nodes,
                               std::vector<int> ambient_nodes)
    : domain_(&domain),
      params_(params),
      ref_(flow_element_matrices(domain.elem_size())),
      inlet_(std::move(inlet_nodes)),
      ambient_(std::move(ambient_nodes)),
      system_(domain.num_nodes(), 4, flat_element_nodes(domain), merge(inlet_, ambient_), "flow")
{
    validate(params_);
}

const Vector& PressureSolver::solve(const Vector& K, const Vector& D)
{
    const auto& d = *domain_;
    if (K.size() != d.num_elements() || D.size() != d.num_elements())
        throw ShapeError("flow coefficients must have one entry per element");
    if (inlet_.empty() && ambient_.empty() && D.maxCoeff() <= 0.0)
        throw SolverError("flow matrix is singular: no Dirichlet nodes and no drainage");

    system_.assemble(std::span<const double>(K.data(), static_cast<std::size_t>(K.size())), ref_.conduction,
                     std::span<const double>(D.data(), static_cast<std::size_t>(D.size())), ref_.mass);
    system_.factorize();

    Vector rhs = Vector::Zero(d.num_nodes());
    if (params_.p_0 != 0.0) {
        for (int e = 0; e < d.num_elements(); ++e) {
            const auto nodes = d.element_nodes(e);
            for (int a = 0; a < 4; ++a) rhs[nodes[static_cast<std::size_t>(a)]] += D[e] * params_.p_0 * ref_.load[a];
        }
    }
    Vector prescribed = Vector::Zero(d.num_nodes());
    for (int n : inlet_) prescribed[n] = params_.p_in;
    p_ = system_.solve(rhs, prescribed);

    const Vector r = system_.multiply(p_) - rhs;
    double res2 = 0.0, reac2 = 0.0;
    for (int n = 0; n < d.num_nodes(); ++n) (system_.is_fixed(n) ? reac2 : res2) += r[n] * r[n];
    residual_norm_ = std::sqrt(res2);
    reaction_norm_ = std::sqrt(reac2);
    // Rounding floor of the matrix-free residual evaluation.
    const double entry_scale = K.cwiseAbs().maxCoeff() * ref_.conduction.cwiseAbs().maxCoeff() +
                               D.cwiseAbs().maxCoeff() * ref_.mass.cwiseAbs().maxCoeff();
    const double floor = 64.0 * std::numeric_limits<double>::epsilon() * entry_scale *
                         std::max(p_.cwiseAbs().maxCoeff(), std::abs(params_.p_0)) *
                         std::sqrt(static_cast<double>(d.num_nodes()));
    if (residual_norm_ > 1e-10 * reaction_norm_ + floor)
        throw SolverError("pressure solve residual " + std::to_string(residual_norm_) +
                          " exceeds 1e-10 x reaction norm " + std::to_string(reaction_norm_));
    return p_;
}

Vector PressureSolver::solve_adjoint(const Vector& rhs) const { return system_.solve_homogeneous(rhs); }

void PressureSolver::residual_derivative(int e, const Vector& p, double dK, double dD, std::span<double> out) const
{
    const auto nodes = domain_->element_nodes(e);
    for (int a = 0; a < 4; ++a) {
        double s = -dD * params_.p_0 * ref_.load[a];
        for (int b = 0; b < 4; ++b)
            s += (dK * ref_.conduction(a, b) + dD * ref_.mass(a, b)) * p[nodes[static_cast<std::size_t>(b)]];
        out[static_cast<std::size_t>(a)] = s;
    }
}

} // namespace pneutop
