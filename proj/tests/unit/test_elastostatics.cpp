#include "pneutop/darcy_pressure.hpp"
#include "pneutop/design_fields.hpp"
#include "pneutop/elastostatics.hpp"
#include "pneutop/errors.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

namespace pneutop {
namespace {

TEST(ElementStiffness, ClosedFormEntriesAndRigidModes)
{
    const double nu = 0.3;
    const Matrix ke = element_stiffness(1.0, nu, 1.0);
    // Closed-form bilinear plane-stress entries (as in the classic 99/88-line codes).
    const double s = 1.0 / (1.0 - nu * nu);
    for (int i = 0; i < 8; ++i) EXPECT_NEAR(ke(i, i), s * (0.5 - nu / 6.0), 1e-14);
    EXPECT_NEAR(ke(0, 1), s * (1.0 + nu) / 8.0, 1e-14);
    EXPECT_NEAR(ke(0, 2), s * (-0.25 - nu / 12.0), 1e-14);
    EXPECT_NEAR(ke(0, 4), s * (-0.25 + nu / 12.0), 1e-14);
    EXPECT_LE((ke - ke.transpose()).cwiseAbs().maxCoeff(), 1e-15);

    // Translations and the infinitesimal rotation about the element centre.
    Eigen::Matrix<double, 8, 3> rigid = Eigen::Matrix<double, 8, 3>::Zero();
    const double xs[4] = {-0.5, 0.5, 0.5, -0.5}, ys[4] = {-0.5, -0.5, 0.5, 0.5};
    for (int a = 0; a < 4; ++a) {
        rigid(2 * a, 0) = 1.0;
        rigid(2 * a + 1, 1) = 1.0;
        rigid(2 * a, 2) = -ys[a];
        rigid(2 * a + 1, 2) = xs[a];
    }
    EXPECT_LE((ke * rigid).cwiseAbs().maxCoeff(), 1e-14);

    Eigen::SelfAdjointEigenSolver<Matrix> eig(ke);
    EXPECT_NEAR(eig.eigenvalues()[2], 0.0, 1e-14);
    EXPECT_GT(eig.eigenvalues()[3], 1e-3);

    // Plane stiffness is independent of the element edge length and linear in E.
    EXPECT_LE((element_stiffness(2.5, nu, 3.0) - 2.5 * ke).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_THROW(element_stiffness(1.0, 0.5, 1.0), ConfigError);
}

TEST(ElasticSolver, ZeroForceGivesZeroResponse)
{
    const DomainModel d = build_domain(testing::square_domain(4));
    ElasticSolver solver(d, 0.3);
    const auto& s = solver.solve(Vector::Ones(d.num_elements()), Vector::Zero(d.num_dofs()));
    EXPECT_EQ(s.u.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(s.u_out, 0.0);
    EXPECT_EQ(s.strain_energy, 0.0);
}

TEST(ElasticSolver, EnergyIdentityAndFixedDofs)
{
    const DomainModel d = build_domain(testing::square_domain(6));
    ElasticSolver solver(d, 0.3);
    const Vector E = simp_modulus(testing::random_field(d.num_elements(), 21), SimpParams{}).value;
    Vector F = testing::random_field(d.num_dofs(), 22, -1.0, 1.0);
    for (int dof : d.fixed_dofs()) F[dof] = 0.0;
    const auto& s = solver.solve(E, F);
    const double work = s.u.dot(F);
    EXPECT_NEAR(2.0 * s.strain_energy, work, 1e-9 * std::abs(work));
    for (int dof : d.fixed_dofs()) EXPECT_EQ(s.u[dof], 0.0);
    EXPECT_DOUBLE_EQ(s.u_out, solver.selector().dot(s.u));
}

TEST(ElasticSolver, StifferMaterialNeverIncreasesCompliance)
{
    const DomainModel d = build_domain(testing::square_domain(6));
    ElasticSolver solver(d, 0.4);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Vector E = simp_modulus(testing::random_field(d.num_elements(), 300 + seed), SimpParams{}).value;
        const Vector bump = testing::random_field(d.num_elements(), 400 + seed, 0.0, 0.5);
        Vector F = testing::random_field(d.num_dofs(), 500 + seed, -1.0, 1.0);
        for (int dof : d.fixed_dofs()) F[dof] = 0.0;
        const double soft = solver.solve(E, F).u.dot(F);
        const double stiff = solver.solve(E + bump, F).u.dot(F);
        EXPECT_LE(stiff, soft * (1.0 + 1e-12)) << "seed " << seed;
    }
}

TEST(ElasticSolver, SpringCarriesTheOutputDof)
{
    // With an all-void structure the spring alone resists a unit output force.
    auto c = testing::square_domain(4);
    c.spring_stiffness = 1.0;
    const DomainModel soft = build_domain(c);
    c.spring_stiffness = 2.0;
    const DomainModel stiffer = build_domain(c);
    Vector F = Vector::Zero(soft.num_dofs());
    F[soft.output_dof()] = 1.0;
    const Vector E = Vector::Constant(soft.num_elements(), 1e-9);
    ElasticSolver a(soft, 0.3), b(stiffer, 0.3);
    const double u1 = a.solve(E, F).u_out, u2 = b.solve(E, F).u_out;
    EXPECT_NEAR(u1, 1.0, 1e-6);
    EXPECT_NEAR(u2, 0.5, 1e-6);
}

TEST(ElasticSolver, AdjointSolveIsSymmetric)
{
    const DomainModel d = build_domain(testing::square_domain(5));
    ElasticSolver solver(d, 0.3);
    solver.solve(simp_modulus(testing::random_field(d.num_elements(), 1), SimpParams{}).value,
                 Vector::Zero(d.num_dofs()));
    Vector a = testing::random_field(d.num_dofs(), 2, -1, 1), b = testing::random_field(d.num_dofs(), 3, -1, 1);
    for (int dof : d.fixed_dofs()) a[dof] = b[dof] = 0.0;
    const double ab = a.dot(solver.solve_adjoint(b)), ba = b.dot(solver.solve_adjoint(a));
    EXPECT_NEAR(ab, ba, 1e-10 * std::abs(ab));
}

TEST(Constraints, VolumeAndStrainEnergy)
{
    const std::vector<double> v(4, 2.0);
    const Vector rho = (Vector(4) << 1.0, 0.0, 0.5, 0.1).finished();
    const VolumeConstraint g1 = volume_constraint(rho, v, 0.2);
    EXPECT_NEAR(g1.value, (1.6 / 4.0) / 0.2, 1e-15);
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(g1.gradient[i], 1.0 / (4.0 * 0.2), 1e-15);
    EXPECT_THROW(volume_constraint(rho, v, 0.0), ConfigError);

    EXPECT_DOUBLE_EQ(strain_energy_constraint(9.0, 10.0), 0.9);
    EXPECT_THROW(strain_energy_constraint(1.0, 0.0), StateError);
    EXPECT_THROW(strain_energy_constraint(1.0, std::nan("")), StateError);
}

TEST(PressureLoad, UniformPressureGivesNoForce)
{
    const DomainModel d = build_domain(testing::square_domain(4));
    const SparseMatrix T = build_coupling(d);
    const Vector F = -(T * Vector::Ones(d.num_nodes()));
    EXPECT_LE(F.cwiseAbs().maxCoeff(), 1e-14);
    // p = y pushes everything towards -y with total force equal to the area.
    Vector p(d.num_nodes());
    for (int n = 0; n < d.num_nodes(); ++n) p[n] = d.node_coord(n)[1];
    const Vector Fy = -(T * p);
    double sx = 0.0, sy = 0.0;
    for (int n = 0; n < d.num_nodes(); ++n) {
        sx += Fy[2 * n];
        sy += Fy[2 * n + 1];
    }
    EXPECT_NEAR(sx, 0.0, 1e-12);
    EXPECT_NEAR(sy, -16.0, 1e-12);
}

} // namespace
} // namespace pneutop
