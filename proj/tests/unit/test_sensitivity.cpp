#include "pneutop/errors.hpp"
#include "pneutop/robust_driver.hpp"
#include "pneutop/sensitivity.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace pneutop {
namespace {

PhysicsParams physics_for(double delta_s)
{
    PhysicsParams p;
    p.flow.delta_s = delta_s;
    return p;
}

// Central differences of (u_out, strain energy) with respect to rho_bar.
struct StateFd {
    Vector du_out, dse;
};

StateFd state_fd(StateModel& model, const Vector& rho_bar, double h)
{
    StateFd fd{Vector(rho_bar.size()), Vector(rho_bar.size())};
    for (Eigen::Index e = 0; e < rho_bar.size(); ++e) {
        Vector rp = rho_bar, rm = rho_bar;
        rp[e] += h;
        rm[e] -= h;
        const auto sp = model.solve(rp);
        const auto sm = model.solve(rm);
        fd.du_out[e] = (sp.u_out - sm.u_out) / (2 * h);
        fd.dse[e] = (sp.strain_energy - sm.strain_energy) / (2 * h);
    }
    model.solve(rho_bar);
    return fd;
}

double max_relative_error(const Vector& analytic, const Vector& fd)
{
    const double scale = fd.cwiseAbs().maxCoeff();
    double worst = 0.0;
    for (Eigen::Index i = 0; i < fd.size(); ++i) worst = std::max(worst, relative_error(analytic[i], fd[i], scale));
    return worst;
}

TEST(Adjoint, OutputDisplacementMatchesFiniteDifferences)
{
    const DomainModel d = build_domain(testing::square_domain(5));
    StateModel model(d, physics_for(1.5));
    const Vector rho = testing::random_field(d.num_elements(), 17, 0.1, 0.9);
    model.solve(rho);
    const Vector l = model.elastic_solver().selector();
    const Vector adj = adjoint_objective(model, l);
    const StateFd fd = state_fd(model, rho, 1e-6);
    EXPECT_LE(max_relative_error(adj, fd.du_out), 1e-5);
}

TEST(Adjoint, StrainEnergyMatchesFiniteDifferences)
{
    const DomainModel d = build_domain(testing::square_domain(5));
    StateModel model(d, physics_for(1.5));
    const Vector rho = testing::random_field(d.num_elements(), 18, 0.1, 0.9);
    const double se_star = 2.5;
    model.solve(rho);
    const Vector adj = adjoint_strain_energy(model, se_star);
    const StateFd fd = state_fd(model, rho, 1e-6);
    EXPECT_LE(max_relative_error(adj, fd.dse / se_star), 1e-5);
}

TEST(Adjoint, DroppingTheLoadTermChangesTheGradient)
{
    const DomainModel d = build_domain(testing::square_domain(4));
    StateModel model(d, physics_for(1.5));
    model.solve(testing::random_field(d.num_elements(), 19, 0.1, 0.9));
    const Vector l = model.elastic_solver().selector();
    const Vector full = adjoint_objective(model, l);
    const Vector ablated = adjoint_objective(model, l, {false});
    double worst = 0.0;
    for (Eigen::Index e = 0; e < full.size(); ++e)
        worst = std::max(worst, std::abs(ablated[e] - full[e]) / std::max(std::abs(full[e]), 1e-30));
    EXPECT_GT(worst, 0.1);
}

TEST(Adjoint, EmptyStructureHasZeroResponse)
{
    const DomainModel d = build_domain(testing::square_domain(4));
    StateModel model(d, physics_for(1.5));
    const auto& s = model.solve(Vector::Zero(d.num_elements()));
    EXPECT_TRUE(s.empty_structure);
    EXPECT_EQ(s.u_out, 0.0);
    EXPECT_EQ(adjoint_objective(model, model.elastic_solver().selector()).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(adjoint_strain_energy(model, 1.0).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Adjoint, RequiresASolvedState)
{
    const DomainModel d = build_domain(testing::square_domain(4));
    StateModel model(d, physics_for(1.5));
    EXPECT_THROW(adjoint_objective(model, Vector::Zero(d.num_dofs())), StateError);
    model.solve(Vector::Constant(d.num_elements(), 0.5));
    EXPECT_THROW(adjoint_strain_energy(model, 0.0), StateError);
    EXPECT_THROW(adjoint_objective(model, Vector::Zero(3)), ShapeError);
    EXPECT_THROW(model.solve(Vector::Zero(2)), ShapeError);
}

TEST(Adjoint, MirroredDomainGivesMirroredGradient)
{
    auto c = testing::square_domain(6);
    c.nds = {{0, 0, 6, 1}};
    const DomainModel d = build_domain(c);
    const DomainModel dm = build_domain(mirror_x(c));
    StateModel a(d, physics_for(2.0)), b(dm, physics_for(2.0));
    const Vector rho = testing::random_field(d.num_elements(), 23, 0.1, 0.9);
    Vector rho_m(rho.size());
    for (int e = 0; e < d.num_elements(); ++e) rho_m[d.mirror_element(e)] = rho[e];
    const double ua = a.solve(rho).u_out, ub = b.solve(rho_m).u_out;
    EXPECT_NEAR(ua, ub, 1e-10 * std::abs(ua));
    const Vector ga = adjoint_objective(a, a.elastic_solver().selector());
    const Vector gb = adjoint_objective(b, b.elastic_solver().selector());
    for (int e = 0; e < d.num_elements(); ++e)
        EXPECT_NEAR(ga[e], gb[d.mirror_element(e)], 1e-9 * ga.cwiseAbs().maxCoeff());
}

TEST(FdOracle, QuadraticIsExactAndErrorsAreScaled)
{
    const FdEvaluator quad = [](const Vector& x) {
        return std::array<double, 3>{x.squaredNorm(), 3.0 * x[0], x[1] * x[2]};
    };
    const Vector x = (Vector(3) << 0.2, 0.4, 0.7).finished();
    const FdResult r = fd_oracle(quad, x, {0, 1, 2}, 1e-4);
    EXPECT_NEAR(r.gradient[0][0], 0.4, 1e-10);
    EXPECT_NEAR(r.gradient[1][2], 0.7, 1e-10);
    EXPECT_NEAR(r.gradient[2][2], 0.4, 1e-10);
    EXPECT_THROW(fd_oracle(quad, x, {3}, 1e-4), ShapeError);
    EXPECT_THROW(fd_oracle(quad, x, {0}, 0.0), ConfigError);

    EXPECT_NEAR(relative_error(1.1, 1.0, 1.0), 0.1, 1e-15);
    // Near-zero components are measured against the floor, not themselves.
    EXPECT_NEAR(relative_error(1e-7, 0.0, 1.0), 1e-7 / kFdRelativeFloor, 1e-15);
    EXPECT_NEAR(convergence_order(4e-4, 1e-4), 2.0, 1e-12);
}

TEST(RobustGradients, BlueprintAndErodedMatchFiniteDifferences)
{
    OptConfig config = testing::square_config(6);
    RobustProblem problem(config);
    const Vector x = testing::random_field(problem.num_variables(), 29, 0.2, 0.8);
    const double beta = 4.0;
    const auto ev = problem.evaluate(x, beta);
    const double h = 1e-6;
    Vector fd_b(x.size()), fd_e(x.size()), fd_g1(x.size()), fd_g2(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        Vector xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        const auto p = problem.evaluate(xp, beta, ev.se_star, false);
        const auto m = problem.evaluate(xm, beta, ev.se_star, false);
        fd_b[i] = (p.f_b - m.f_b) / (2 * h);
        fd_e[i] = (p.f_e - m.f_e) / (2 * h);
        fd_g1[i] = (p.g1 - m.g1) / (2 * h);
        fd_g2[i] = (p.g2 - m.g2) / (2 * h);
    }
    EXPECT_LE(max_relative_error(ev.blueprint.df_drho, fd_b), 1e-5);
    EXPECT_LE(max_relative_error(ev.eroded.df_drho, fd_e), 1e-5);
    EXPECT_LE(max_relative_error(ev.blueprint.dg1_drho, fd_g1), 1e-6);
    EXPECT_LE(max_relative_error(ev.eroded.dg2_drho, fd_g2), 1e-5);
}

} // namespace
} // namespace pneutop
