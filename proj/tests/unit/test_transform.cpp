#include <gtest/gtest.h>

#include <numbers>

#include "synthforge/core/rng.hpp"
#include "synthforge/core/transform.hpp"

using namespace synthforge;

namespace {

IntensityVolume random_image(Dims d, std::uint64_t seed)
{
    IntensityVolume v(d);
    Sampler s(seed);
    for (auto& x : v.storage())
        x = static_cast<float>(s.uniform(0, 255));
    return v;
}

double max_abs_diff(const Vec3& a, const Vec3& b)
{
    return std::max({std::abs(a[0] - b[0]), std::abs(a[1] - b[1]), std::abs(a[2] - b[2])});
}

} // namespace

TEST(Affine, IdentityIsBitExact)
{
    const auto img = random_image(Dims{17, 12, 9}, 1);
    EXPECT_EQ(apply_affine(img, AffineTransform::identity(), Interpolation::trilinear), img);
    EXPECT_EQ(apply_affine(img, AffineTransform::identity(), Interpolation::nearest), img);

    LabelVolume lab(Dims{9, 9, 9});
    Sampler s(2);
    for (auto& v : lab.storage())
        v = static_cast<Label>(s.uniform_int(0, 40));
    AffineTransform id;
    id.center = grid_center(lab.dims());
    EXPECT_EQ(apply_affine(lab, id, Interpolation::nearest), lab);
}

TEST(Affine, IntegerTranslationMovesVoxel)
{
    BinaryVolume v(Dims::cube(12));
    v(5, 5, 5) = 1;
    AffineTransform xf;
    xf.translation = {1, 0, 0};
    const auto out = apply_affine(v, xf, Interpolation::nearest);
    EXPECT_EQ(count_nonzero(out), 1u);
    EXPECT_EQ(out(6, 5, 5), 1);
}

TEST(Affine, TrilinearOnLabelsRejected)
{
    LabelVolume v(Dims::cube(4));
    EXPECT_THROW(apply_affine(v, AffineTransform::identity(), Interpolation::trilinear), Error);
}

TEST(Affine, HalfTurnTwiceRestoresBar)
{
    BinaryVolume bar(Dims::cube(33));
    for (int x = 6; x < 27; ++x)
        for (int y = 13; y < 17; ++y)
            for (int z = 14; z < 19; ++z)
                bar(x, y, z) = 1;
    AffineTransform xf;
    xf.rotation = {0, 0, std::numbers::pi};
    xf.center = {15.3, 16.1, 16.0}; // off-grid pivot so rounding matters
    const auto once = apply_affine(bar, xf, Interpolation::nearest);
    const auto twice = apply_affine(once, xf, Interpolation::nearest);
    std::size_t mismatch = 0;
    for (std::size_t i = 0; i < bar.size(); ++i)
        mismatch += bar[i] != twice[i];
    EXPECT_LE(mismatch, count_nonzero(bar) / 100);
}

TEST(Affine, CompositionAssociativeAndInverse)
{
    AffineTransform a, b, c;
    a.rotation = {0.3, -0.2, 1.1};
    a.scale = {1.2, 0.8, 1.05};
    a.center = {5, 6, 7};
    b.rotation = {-0.5, 0.1, 0.0};
    b.translation = {2, -3, 1.5};
    c.scale = {0.7, 1.3, 1.0};
    c.center = {1, 1, 1};
    const auto A = a.matrix(), B = b.matrix(), C = c.matrix();
    const Vec3 p{3.5, -2.0, 9.25};
    EXPECT_LT(max_abs_diff(A.compose(B).compose(C).apply(p), A.compose(B.compose(C)).apply(p)), 1e-12);
    EXPECT_LT(max_abs_diff(A.inverse().apply(A.apply(p)), p), 1e-12);
    EXPECT_LT(max_abs_diff(a.inverse_matrix().apply(a.matrix().apply(p)), p), 1e-12);
    EXPECT_EQ(AffineTransform::identity().matrix().apply(p), p);
}

TEST(Affine, NonPositiveScaleRejected)
{
    AffineTransform xf;
    xf.scale = {1, 0, 1};
    EXPECT_THROW(xf.validate(), Error);
}

TEST(Affine, TrilinearReproducesLinearRamp)
{
    IntensityVolume ramp(Dims::cube(16));
    for (int z = 0; z < 16; ++z)
        for (int y = 0; y < 16; ++y)
            for (int x = 0; x < 16; ++x)
                ramp(x, y, z) = static_cast<float>(x + 2 * y + 3 * z);
    AffineTransform xf;
    xf.translation = {0.5, 0.25, 0.0};
    const auto out = apply_affine(ramp, xf, Interpolation::trilinear);
    // interior voxel samples ramp at (x - 0.5, y - 0.25, z)
    EXPECT_NEAR(out(8, 8, 8), (8 - 0.5) + 2 * (8 - 0.25) + 3 * 8, 1e-4);
}
