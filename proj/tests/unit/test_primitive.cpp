#include <gtest/gtest.h>

#include <numbers>

#include "oracles.hpp"
#include "synthforge/core/primitive.hpp"

using namespace synthforge;

namespace {
constexpr double pi = std::numbers::pi;
}

TEST(Primitive, EllipsoidVolume)
{
    const auto v = rasterize_primitive(Primitive::ellipsoid(10, 10, 10), Dims::cube(32), grid_center(Dims::cube(32)));
    const double analytic = 4.0 / 3.0 * pi * 1000.0;
    EXPECT_NEAR(static_cast<double>(count_nonzero(v)), analytic, 0.03 * analytic);
    EXPECT_EQ(count_nonzero(v), oracle::count_ellipsoid(32, {15.5, 15.5, 15.5}, {10, 10, 10}));
}

TEST(Primitive, CylinderVolume)
{
    const auto v = rasterize_primitive(Primitive::cylinder(5, 10), Dims::cube(32), grid_center(Dims::cube(32)));
    const double analytic = pi * 25.0 * 10.0;
    EXPECT_NEAR(static_cast<double>(count_nonzero(v)), analytic, 0.03 * analytic);
    EXPECT_EQ(count_nonzero(v), oracle::count_cylinder(32, {15.5, 15.5, 15.5}, 5, 10));
}

TEST(Primitive, ConeVolumeAndApexUp)
{
    const Dims d = Dims::cube(48);
    const auto v = rasterize_primitive(Primitive::cone(12, 30), d, grid_center(d));
    const double analytic = pi * 144.0 * 30.0 / 3.0;
    EXPECT_NEAR(static_cast<double>(count_nonzero(v)), analytic, 0.03 * analytic);
    EXPECT_EQ(count_nonzero(v), oracle::count_cone(48, {23.5, 23.5, 23.5}, 12, 30));
    // slices shrink toward +z
    auto slice = [&](int z) {
        std::size_t n = 0;
        for (int y = 0; y < 48; ++y)
            for (int x = 0; x < 48; ++x)
                n += v(x, y, z);
        return n;
    };
    EXPECT_GT(slice(12), slice(23));
    EXPECT_GT(slice(23), slice(35));
}

TEST(Primitive, EllipsoidsFromRadius8Within3Percent)
{
    // even and odd grids put the centre on half-integer and integer coordinates
    for (double r : {8.0, 9.0, 11.5, 16.0, 20.0})
        for (int parity : {0, 1}) {
            const Dims d = Dims::cube(static_cast<int>(2 * r) + 8 + parity);
            const auto e = rasterize_primitive(Primitive::ellipsoid(r, r * 1.1, r * 0.9), d, grid_center(d));
            const double ve = 4.0 / 3.0 * pi * r * r * 1.1 * r * 0.9;
            EXPECT_NEAR(static_cast<double>(count_nonzero(e)), ve, 0.03 * ve) << r << " " << parity;
        }
}

TEST(Primitive, CappedSolidsMatchOracleOnBothParities)
{
    // flat caps on a lattice plane add a whole slice, so only the oracle count is exact
    for (double r : {8.0, 10.0, 16.0})
        for (int parity : {0, 1}) {
            const int n = static_cast<int>(2 * r) + 8 + parity;
            const Dims d = Dims::cube(n);
            const Vec3 c = grid_center(d);
            const auto cyl = rasterize_primitive(Primitive::cylinder(r, 1.5 * r), d, c);
            EXPECT_EQ(count_nonzero(cyl), oracle::count_cylinder(n, {c[0], c[1], c[2]}, r, 1.5 * r));
            const auto cone = rasterize_primitive(Primitive::cone(r, 1.5 * r), d, c);
            EXPECT_EQ(count_nonzero(cone), oracle::count_cone(n, {c[0], c[1], c[2]}, r, 1.5 * r));
        }
}

TEST(Primitive, SubVoxelEllipsoidBetweenCentresIsEmpty)
{
    const auto v = rasterize_primitive(Primitive::ellipsoid(0.4, 0.4, 0.4), Dims::cube(8), Vec3{3.5, 3.5, 3.5});
    EXPECT_EQ(count_nonzero(v), 0u);
}

TEST(Primitive, DegenerateRejected)
{
    EXPECT_THROW(rasterize_primitive(Primitive::ellipsoid(0, 1, 1), Dims::cube(4), Vec3{}), Error);
    EXPECT_THROW(rasterize_primitive(Primitive::cylinder(2, 0), Dims::cube(4), Vec3{}), Error);
    EXPECT_THROW(rasterize_primitive(Primitive::cone(0, 3), Dims::cube(4), Vec3{}), Error);
}
