#include <gtest/gtest.h>

#include "synthforge/core/components.hpp"
#include "synthforge/core/digest.hpp"
#include "synthforge/core/filter.hpp"
#include "synthforge/core/range.hpp"
#include "synthforge/core/volume.hpp"

using namespace synthforge;

TEST(Volume, XFastestLayout)
{
    LabelVolume v(Dims{4, 3, 2});
    EXPECT_EQ(v.size(), 24u);
    EXPECT_EQ(v.index(1, 0, 0), 1u);
    EXPECT_EQ(v.index(0, 1, 0), 4u);
    EXPECT_EQ(v.index(0, 0, 1), 12u);
    EXPECT_EQ(v.coords(17), (Index3{1, 1, 1}));
    v(3, 2, 1) = 9;
    EXPECT_EQ(v[23], 9);
    EXPECT_EQ(v.at_or(-1, 0, 0, 5), 5);
}

TEST(Volume, DataLengthMustMatchDims)
{
    EXPECT_THROW(LabelVolume(Dims{2, 2, 2}, std::vector<Label>(7)), Error);
    EXPECT_NO_THROW(LabelVolume(Dims{2, 2, 2}, std::vector<Label>(8)));
}

TEST(Volume, BoundingBoxAndCrop)
{
    BinaryVolume v(Dims::cube(8));
    v(2, 3, 4) = 1;
    v(5, 3, 6) = 1;
    const BBox b = bounding_box(v);
    EXPECT_EQ(b.lo, (Index3{2, 3, 4}));
    EXPECT_EQ(b.hi, (Index3{5, 3, 6}));
    const BinaryVolume c = crop(v, b);
    EXPECT_EQ(c.dims(), (Dims{4, 1, 3}));
    EXPECT_EQ(count_nonzero(c), 2u);
    EXPECT_TRUE(bounding_box(BinaryVolume(Dims::cube(3))).empty());
}

TEST(Components, LargestSixConnected)
{
    BinaryVolume v(Dims::cube(6));
    v(0, 0, 0) = 1;
    v(1, 1, 0) = 1; // diagonal only: separate component
    for (int x = 2; x < 6; ++x)
        v(x, 4, 4) = 1;
    EXPECT_EQ(count_components(v), 3);
    const BinaryVolume l = largest_component(v);
    EXPECT_EQ(count_nonzero(l), 4u);
    EXPECT_EQ(l(5, 4, 4), 1);
}

TEST(Filter, KernelNormalizedAndTruncatedAt3Sigma)
{
    const auto k = gaussian_kernel(2.0);
    EXPECT_EQ(k.size(), 13u);
    double s = 0;
    for (double w : k)
        s += w;
    EXPECT_NEAR(s, 1.0, 1e-12);
    EXPECT_EQ(gaussian_kernel(0.0).size(), 1u);
}

TEST(Filter, BlurPreservesMassAwayFromBorder)
{
    Volume<float> v(Dims::cube(32));
    v(16, 16, 16) = 1000.0f;
    Volume<float> b = v;
    gaussian_blur(b, Vec3{1.5, 1.5, 1.5}, Border::zero);
    double s = 0;
    for (float x : b.storage())
        s += x;
    EXPECT_NEAR(s, 1000.0, 1e-2);
    EXPECT_GT(b(16, 16, 16), b(17, 16, 16));
}

TEST(Range, ScaleFactor)
{
    EXPECT_DOUBLE_EQ(length_scale_factor(Dims::cube(128)), 1.0);
    EXPECT_DOUBLE_EQ(length_scale_factor(Dims::cube(256)), 2.0);
    EXPECT_DOUBLE_EQ(length_scale_factor(Dims::cube(64)), 0.5);
    EXPECT_NEAR(length_scale_factor(Dims{64, 128, 256}), 1.0, 1e-12);
    EXPECT_THROW((Range{2.0, 1.0}.validate("x")), ConfigError);
}

TEST(Digest, KnownSha256)
{
    EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    LabelVolume a(Dims::cube(4)), b(Dims::cube(4));
    EXPECT_EQ(volume_digest(a), volume_digest(b));
    b[3] = 1;
    EXPECT_NE(volume_digest(a), volume_digest(b));
    EXPECT_NE(volume_digest(LabelVolume(Dims{4, 2, 8})), volume_digest(a));
}
