#include "pneutop/design_fields.hpp"
#include "pneutop/errors.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace pneutop {
namespace {

// Reference values below were computed with an independent Python script
// (direct sums over the neighbour stencil, math.tanh) and frozen.

TEST(DensityFilter, InteriorAndCornerWeights)
{
    const DomainModel d = build_domain(testing::square_domain(8));
    const DensityFilter f = DensityFilter::build(d, 1.5);
    const int centre = d.element_index(4, 4);
    EXPECT_NEAR(f.weights().coeff(centre, centre), 0.39030525964358065, 1e-14);
    const int corner = d.element_index(0, 0);
    EXPECT_NEAR(f.weights().coeff(corner, corner), 0.5800943102542602, 1e-14);

    const DomainModel big = build_domain(testing::square_domain(20));
    const DensityFilter wide = DensityFilter::build(big, 7.6);
    const int mid = big.element_index(10, 10);
    EXPECT_NEAR(wide.weights().coeff(mid, mid), 0.016507901977253773, 1e-14);
}

TEST(DensityFilter, RowsAreConvexCombinations)
{
    const DomainModel d = build_domain(testing::square_domain(10));
    const DensityFilter f = DensityFilter::build(d, 2.5);
    for (int i = 0; i < f.size(); ++i) {
        double sum = 0.0;
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(f.weights(), i); it; ++it) {
            EXPECT_GE(it.value(), 0.0);
            sum += it.value();
        }
        EXPECT_NEAR(sum, 1.0, 1e-14);
    }
    const Vector ones = Vector::Ones(d.num_elements());
    EXPECT_LE((f.apply(ones) - ones).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(DensityFilter, BackwardIsTheAdjointOfApply)
{
    const DomainModel d = build_domain(testing::square_domain(9));
    const DensityFilter f = DensityFilter::build(d, 2.2);
    const Vector a = testing::random_field(d.num_elements(), 3);
    const Vector b = testing::random_field(d.num_elements(), 4, -1.0, 1.0);
    EXPECT_NEAR(f.apply(a).dot(b), a.dot(f.backward(b)), 1e-12);
}

TEST(DensityFilter, RejectsBadInput)
{
    const DomainModel d = build_domain(testing::square_domain(4));
    EXPECT_THROW(DensityFilter::build(d, 0.0), ConfigError);
    const DensityFilter f = DensityFilter::build(d, 1.5);
    EXPECT_THROW(f.apply(Vector::Zero(3)), ShapeError);
}

TEST(Projection, ReferenceValues)
{
    EXPECT_NEAR(heaviside(0.3, 0.1, 10.0), 0.9795796381563775, 1e-15);
    EXPECT_NEAR(heaviside(0.5, 0.5, 8.0), 0.5, 1e-15);
    EXPECT_NEAR(heaviside(0.7, 0.6, 4.0), 0.7156840133327252, 1e-15);
    for (double beta : {1.0, 8.0, 128.0}) {
        for (double eta : {0.1, 0.5, 0.6}) {
            EXPECT_NEAR(heaviside(0.0, eta, beta), 0.0, 1e-15);
            EXPECT_NEAR(heaviside(1.0, eta, beta), 1.0, 1e-15);
        }
    }
}

TEST(Projection, DerivativeMatchesCentralDifference)
{
    for (double beta : {1.0, 4.0, 32.0}) {
        for (double x : {0.05, 0.3, 0.55, 0.62, 0.9}) {
            const double h = 1e-6;
            const double fd = (heaviside(x + h, 0.6, beta) - heaviside(x - h, 0.6, beta)) / (2 * h);
            EXPECT_NEAR(heaviside_derivative(x, 0.6, beta), fd, 1e-6 * std::max(1.0, std::abs(fd)));
        }
    }
}

TEST(Projection, ErodedNeverExceedsBlueprint)
{
    const DomainModel d = build_domain(testing::square_domain(12));
    const DensityFilter f = DensityFilter::build(d, 2.0);
    const Vector x = testing::random_field(d.num_design_variables(), 11);
    for (double beta : {1.0, 2.0, 16.0, 128.0}) {
        const DesignField field = realize(d, f, x, beta, 0.1);
        EXPECT_LE((field.eroded.value - field.blueprint.value).maxCoeff(), 0.0);
        EXPECT_DOUBLE_EQ(field.eta_blueprint, 0.5);
        EXPECT_DOUBLE_EQ(field.eta_eroded, 0.6);
    }
}

TEST(Projection, OrderingHoldsWhenBothProjectionsSaturate)
{
    const DomainModel d = build_domain(testing::square_domain(40));
    const DensityFilter f = DensityFilter::build(d, 4.5);
    // Filter rows sum to 1 only up to rounding, so a solid design can give
    // rho_tilde slightly above 1.
    const Vector solid = Vector::Ones(d.num_design_variables());
    const Vector x = testing::random_field(d.num_design_variables(), 12, 0.6, 1.0);
    for (double beta : {1.0, 2.0, 4.0, 8.0, 64.0, 128.0}) {
        for (const Vector* v : {&solid, &x}) {
            const DesignField field = realize(d, f, *v, beta, 0.1);
            EXPECT_LE((field.eroded.value - field.blueprint.value).maxCoeff(), 0.0) << "beta " << beta;
        }
    }
}

TEST(Simp, ReferenceValueAndBounds)
{
    const SimpParams p;
    const ModulusField m = simp_modulus(Vector::Constant(1, 0.5), p);
    EXPECT_NEAR(m.value[0], 0.12500000087500002, 1e-17);
    EXPECT_NEAR(m.derivative[0], 3 * 0.25 * (1 - 1e-9), 1e-15);
    const ModulusField ends = simp_modulus((Vector(2) << 0.0, 1.0).finished(), p);
    EXPECT_DOUBLE_EQ(ends.value[0], p.E0);
    EXPECT_DOUBLE_EQ(ends.value[1], p.E1);
    EXPECT_THROW(simp_modulus(Vector::Zero(1), SimpParams{1.0, 1.0, 3.0}), ConfigError);
}

TEST(Grayness, ReferenceValues)
{
    EXPECT_DOUBLE_EQ(grayness(Vector::Constant(10, 0.5)), 1.0);
    EXPECT_DOUBLE_EQ(grayness((Vector(4) << 0.0, 1.0, 1.0, 0.0).finished()), 0.0);
    EXPECT_DOUBLE_EQ(grayness((Vector(2) << 0.5, 1.0).finished()), 0.5);
}

TEST(PassiveRegions, ExpandRestrictAndEnforce)
{
    auto c = testing::square_domain(6);
    c.nds = {{0, 0, 6, 1}};
    c.ndv = {{5, 1, 6, 2}};
    const DomainModel d = build_domain(c);
    const Vector x = testing::random_field(d.num_design_variables(), 5);
    const Vector full = expand_design(d, x);
    EXPECT_EQ(restrict_to_design(d, full), x);
    EXPECT_EQ(full[d.element_index(2, 0)], 1.0);
    EXPECT_EQ(full[d.element_index(5, 1)], 0.0);

    const DensityFilter f = DensityFilter::build(d, 1.5);
    const DesignField field = realize(d, f, x, 4.0, 0.1);
    for (int e = 0; e < d.num_elements(); ++e) {
        if (d.region(e) == Region::design) continue;
        const double expected = d.region(e) == Region::solid ? 1.0 : 0.0;
        EXPECT_EQ(field.blueprint.value[e], expected);
        EXPECT_EQ(field.eroded.value[e], expected);
        EXPECT_EQ(field.blueprint.derivative[e], 0.0);
    }
}

} // namespace
} // namespace pneutop
