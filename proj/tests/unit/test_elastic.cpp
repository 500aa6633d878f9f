#include <gtest/gtest.h>

#include <set>

#include "synthforge/core/elastic.hpp"

using namespace synthforge;

namespace {

double autocorrelation_x(const Volume<float>& f, int lag)
{
    double mean = 0;
    for (float v : f.storage())
        mean += v;
    mean /= static_cast<double>(f.size());
    double num = 0, den = 0;
    const Dims d = f.dims();
    for (int z = 0; z < d.nz; ++z)
        for (int y = 0; y < d.ny; ++y)
            for (int x = 0; x < d.nx; ++x) {
                const double a = f(x, y, z) - mean;
                den += a * a;
                if (x + lag < d.nx)
                    num += a * (f(x + lag, y, z) - mean);
            }
    return num / den * static_cast<double>(d.nx) / (d.nx - lag);
}

} // namespace

TEST(ElasticField, ZeroAlphaGivesZeroField)
{
    const auto f = sample_elastic_field(Dims::cube(16), {5.0, 0.0}, RngStream(1));
    EXPECT_EQ(f.max_magnitude(), 0.0);
}

TEST(ElasticField, MaxMagnitudeEqualsAlpha)
{
    for (std::uint64_t seed = 0; seed < 6; ++seed)
        for (double alpha : {0.5, 7.5, 25.0}) {
            const auto f = sample_elastic_field(Dims{24, 20, 18}, {3.0 + seed, alpha}, RngStream(seed));
            EXPECT_NEAR(f.max_magnitude(), alpha, 1e-4) << seed << " " << alpha;
        }
}

TEST(ElasticField, SmoothAtLargeSigma)
{
    const auto f = sample_elastic_field(Dims::cube(64), {20.0, 10.0}, RngStream(99));
    EXPECT_GT(autocorrelation_x(f.component[0], 5), 0.5);
}

TEST(ElasticField, DeterministicPerStream)
{
    const auto a = sample_elastic_field(Dims::cube(12), {2.0, 3.0}, RngStream(4).child(1));
    const auto b = sample_elastic_field(Dims::cube(12), {2.0, 3.0}, RngStream(4).child(1));
    const auto c = sample_elastic_field(Dims::cube(12), {2.0, 3.0}, RngStream(4).child(2));
    EXPECT_EQ(a.component[0], b.component[0]);
    EXPECT_NE(a.component[0], c.component[0]);
}

TEST(ElasticParams, Validation)
{
    EXPECT_THROW((ElasticParams{0.0, 1.0}.validate()), Error);
    EXPECT_THROW((ElasticParams{1.0, -1.0}.validate()), Error);
    EXPECT_NO_THROW((ElasticParams{1.0, 0.0}.validate()));
}

TEST(Warp, ZeroFieldIsBitExactIdentity)
{
    LabelVolume lab(Dims{10, 11, 12});
    IntensityVolume img(Dims{10, 11, 12});
    Sampler s(3);
    for (std::size_t i = 0; i < lab.size(); ++i) {
        lab[i] = static_cast<Label>(s.uniform_int(0, 300));
        img[i] = static_cast<float>(s.uniform(-5, 5));
    }
    const DisplacementField zero(lab.dims());
    EXPECT_EQ(warp_volume(lab, zero, Interpolation::nearest), lab);
    EXPECT_EQ(warp_volume(img, zero, Interpolation::trilinear), img);
    const auto z2 = sample_elastic_field(lab.dims(), {4.0, 0.0}, RngStream(5));
    EXPECT_EQ(warp_volume(lab, z2, Interpolation::nearest), lab);
}

TEST(Warp, BackwardSemantics)
{
    BinaryVolume v(Dims::cube(16));
    v(8, 8, 8) = 1;
    DisplacementField f(v.dims());
    f.component[0].fill(2.0f);
    const auto out = warp_volume(v, f, Interpolation::nearest);
    EXPECT_EQ(count_nonzero(out), 1u);
    EXPECT_EQ(out(6, 8, 8), 1);
}

TEST(Warp, LabelSetOnlyShrinks)
{
    LabelVolume lab(Dims::cube(24));
    Sampler s(8);
    for (auto& v : lab.storage())
        v = static_cast<Label>(2 * s.uniform_int(0, 20));
    std::set<Label> in(lab.storage().begin(), lab.storage().end());
    in.insert(0);
    const auto f = sample_elastic_field(lab.dims(), {3.0, 6.0}, RngStream(8));
    const auto out = warp_volume(lab, f, Interpolation::nearest);
    for (Label v : out.storage())
        ASSERT_TRUE(in.count(v)) << v;
}

TEST(Warp, DimsMismatchRejected)
{
    EXPECT_THROW(warp_volume(LabelVolume(Dims::cube(4)), DisplacementField(Dims::cube(5)), Interpolation::nearest), Error);
}
