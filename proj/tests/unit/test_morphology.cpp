#include <gtest/gtest.h>

#include "oracles.hpp"
#include "synthforge/core/morphology.hpp"
#include "synthforge/core/rng.hpp"

using namespace synthforge;

namespace {

BinaryVolume random_binary(Dims d, double p, Sampler& s)
{
    BinaryVolume v(d);
    for (auto& x : v.storage())
        x = s.unit() < p;
    return v;
}

oracle::Grid to_grid(const BinaryVolume& v)
{
    oracle::Grid g(v.dims().nx, v.dims().ny, v.dims().nz);
    g.v.assign(v.storage().begin(), v.storage().end());
    return g;
}

bool subset(const BinaryVolume& a, const BinaryVolume& b)
{
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] && !b[i])
            return false;
    return true;
}

} // namespace

TEST(Morphology, DilateSingleVoxelGivesCube)
{
    BinaryVolume v(Dims::cube(9));
    v(4, 4, 4) = 1;
    const auto d = morphology(v, MorphOp::dilate, 1);
    EXPECT_EQ(count_nonzero(d), 27u);
    const BBox b = bounding_box(d);
    EXPECT_EQ(b.lo, (Index3{3, 3, 3}));
    EXPECT_EQ(b.hi, (Index3{5, 5, 5}));
}

TEST(Morphology, ErodeCubeGivesCentre)
{
    BinaryVolume v(Dims::cube(9));
    for (int z = 3; z < 6; ++z)
        for (int y = 3; y < 6; ++y)
            for (int x = 3; x < 6; ++x)
                v(x, y, z) = 1;
    const auto e = morphology(v, MorphOp::erode, 1);
    EXPECT_EQ(count_nonzero(e), 1u);
    EXPECT_EQ(e(4, 4, 4), 1);
}

TEST(Morphology, BorderIsBackground)
{
    BinaryVolume full(Dims::cube(5), 1);
    const auto e = morphology(full, MorphOp::erode, 1);
    EXPECT_EQ(count_nonzero(e), 27u);
}

TEST(Morphology, MatchesNaiveOracle)
{
    Sampler s(2024);
    for (int trial = 0; trial < 60; ++trial) {
        const auto v = random_binary(Dims{16, 13, 11}, 0.3 + 0.4 * s.unit(), s);
        const int op = static_cast<int>(s.uniform_int(0, 3));
        const int it = static_cast<int>(s.uniform_int(1, 3));
        const auto got = morphology(v, static_cast<MorphOp>(op), it);
        const auto want = oracle::naive_morphology(to_grid(v), op, it);
        ASSERT_EQ(got.storage(), want.v) << "trial " << trial << " op " << op << " it " << it;
    }
}

TEST(Morphology, DualityAwayFromBorder)
{
    Sampler s(77);
    for (int trial = 0; trial < 10; ++trial) {
        // foreground confined to the interior, 3-voxel margin
        BinaryVolume v(Dims::cube(20));
        for (int z = 3; z < 17; ++z)
            for (int y = 3; y < 17; ++y)
                for (int x = 3; x < 17; ++x)
                    v(x, y, z) = s.unit() < 0.5;
        BinaryVolume comp(v.dims());
        for (std::size_t i = 0; i < v.size(); ++i)
            comp[i] = !v[i];
        const auto e = morphology(comp, MorphOp::erode, 1);
        const auto d = morphology(v, MorphOp::dilate, 1);
        for (int z = 1; z < 19; ++z)
            for (int y = 1; y < 19; ++y)
                for (int x = 1; x < 19; ++x)
                    ASSERT_EQ(e(x, y, z), !d(x, y, z));
    }
}

TEST(Morphology, ExtensivityAndIdempotence)
{
    Sampler s(5);
    for (int trial = 0; trial < 10; ++trial) {
        const auto v = random_binary(Dims::cube(14), 0.5, s);
        EXPECT_TRUE(subset(v, morphology(v, MorphOp::dilate, 2)));
        EXPECT_TRUE(subset(morphology(v, MorphOp::erode, 2), v));
        const auto o = morphology(v, MorphOp::open, 1);
        EXPECT_EQ(morphology(o, MorphOp::open, 1), o);
        const auto c = morphology(v, MorphOp::close, 1);
        EXPECT_EQ(morphology(c, MorphOp::close, 1), c);
    }
}

TEST(Morphology, IterationRange)
{
    BinaryVolume v(Dims::cube(4));
    EXPECT_THROW(morphology(v, MorphOp::dilate, 0), Error);
    EXPECT_THROW(morphology(v, MorphOp::dilate, 4), Error);
    EXPECT_EQ(morph_op_from_string("close"), MorphOp::close);
    EXPECT_THROW(morph_op_from_string("blur"), Error);
}
