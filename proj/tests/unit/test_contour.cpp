#include "pneutop/contour.hpp"
#include "pneutop/errors.hpp"

#include <gtest/gtest.h>

#include <algorithm>

namespace pneutop {
namespace {

Vector field(int nelx, int nely, double fill)
{
    return Vector::Constant(static_cast<Eigen::Index>(nelx) * nely, fill);
}

void set(Vector& v, int nely, int ex, int ey, double value) { v[static_cast<Eigen::Index>(ex) * nely + ey] = value; }

TEST(Contour, EmptyFieldHasNoLoops)
{
    EXPECT_TRUE(extract_contour(4, 3, 1.0, field(4, 3, 0.0)).empty());
}

TEST(Contour, FullFieldTracesTheDomainEdge)
{
    const auto loops = extract_contour(4, 3, 2.0, field(4, 3, 1.0));
    ASSERT_EQ(loops.size(), 1u);
    // Zero padding cuts each corner by a right triangle with legs h / 2.
    EXPECT_NEAR(signed_area(loops[0]), 8.0 * 6.0 - 4 * 0.5, 1e-12);
    for (const auto& p : loops[0].points) {
        EXPECT_GE(p[0], 0.0);
        EXPECT_LE(p[0], 8.0);
        EXPECT_GE(p[1], 0.0);
        EXPECT_LE(p[1], 6.0);
    }
}

TEST(Contour, SingleElementGivesADiamond)
{
    Vector v = field(3, 3, 0.0);
    set(v, 3, 1, 1, 1.0);
    const auto loops = extract_contour(3, 3, 1.0, v);
    ASSERT_EQ(loops.size(), 1u);
    EXPECT_EQ(loops[0].points.size(), 4u);
    EXPECT_NEAR(signed_area(loops[0]), 0.5, 1e-12);
}

TEST(Contour, HolesRunClockwise)
{
    Vector v = field(3, 3, 1.0);
    set(v, 3, 1, 1, 0.0);
    const auto loops = extract_contour(3, 3, 1.0, v);
    ASSERT_EQ(loops.size(), 2u);
    EXPECT_NEAR(total_signed_area(loops), 9.0 - 4 * 0.125 - 0.5, 1e-12);
    const double a0 = signed_area(loops[0]), a1 = signed_area(loops[1]);
    EXPECT_LT(std::min(a0, a1), 0.0);
    EXPECT_GT(std::max(a0, a1), 0.0);
}

TEST(Contour, LevelInterpolatesLinearly)
{
    // Two columns, 1 and 0.25: the 0.5 level sits two thirds of the way
    // between their centres.
    Vector v(2);
    v << 1.0, 0.25;
    const auto loops = extract_contour(2, 1, 1.0, v);
    ASSERT_EQ(loops.size(), 1u);
    double max_x = 0.0;
    for (const auto& p : loops[0].points) max_x = std::max(max_x, p[0]);
    EXPECT_NEAR(max_x, 0.5 + 2.0 / 3.0, 1e-12);
}

TEST(Contour, WritersAndShapeCheck)
{
    const auto loops = extract_contour(2, 2, 1.0, field(2, 2, 1.0));
    const std::string svg = contours_svg(loops, 2.0, 2.0);
    EXPECT_NE(svg.find("<svg"), std::string::npos);
    EXPECT_NE(svg.find("evenodd"), std::string::npos);
    const std::string segs = contours_segments(loops);
    // Header line plus one line per segment.
    EXPECT_EQ(static_cast<std::size_t>(std::count(segs.begin(), segs.end(), '\n')), loops[0].points.size() + 1);
    EXPECT_THROW(extract_contour(2, 2, 1.0, Vector::Zero(3)), ShapeError);
}

} // namespace
} // namespace pneutop
