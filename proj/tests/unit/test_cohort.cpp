#include <gtest/gtest.h>

#include <set>

#include "synthforge/cohort/cohort.hpp"

using namespace synthforge;

namespace {

constexpr int N = 48;

struct Fixture {
    ShapePool pool;
    ContainerMask container;
    Blueprint bp;
    SubjectRanges ranges;
};

const Fixture& fixture()
{
    static const Fixture f = [] {
        Fixture x;
        x.pool = synth_fallback_pool(4, 3, RngStream(21), FallbackPoolParams{.grid = 16, .sigma_min = 1.5, .sigma_max = 2.5});
        x.container = generate_container_with_retry(ContainerRanges::for_dims(Dims::cube(N)), Dims::cube(N), RngStream(22));
        BlueprintRanges br;
        br.k_min = 20;
        br.k_max = 30;
        x.bp = sample_blueprint(x.pool, x.container, br, RngStream(23));
        x.ranges = SubjectRanges::for_dims(Dims::cube(N));
        return x;
    }();
    return f;
}

ContainerMask box_container(int n, int lo, int hi)
{
    ContainerMask c;
    c.mask = BinaryVolume(Dims::cube(n));
    for (int z = lo; z < hi; ++z)
        for (int y = lo; y < hi; ++y)
            for (int x = lo; x < hi; ++x)
                c.mask(x, y, z) = 1;
    return c;
}

LabelVolume canvas_for(const ContainerMask& c)
{
    LabelVolume v(c.mask.dims());
    for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = c.mask[i];
    return v;
}

} // namespace

TEST(Placement, EntirelyOutsideLeavesCanvasUnchanged)
{
    const ContainerMask c = box_container(16, 4, 12);
    LabelVolume canvas = canvas_for(c);
    const LabelVolume before = canvas;
    const BinaryVolume organ(Dims::cube(3), 1);
    const PlacementResult r = place_organ(canvas, c, organ, {1, 1, 1}, 2);
    EXPECT_EQ(canvas, before);
    EXPECT_EQ(r.organ_voxels, 27u);
    EXPECT_TRUE(r.fully_clipped());
}

TEST(Placement, LaterRuleWins)
{
    const ContainerMask c = box_container(16, 2, 14);
    LabelVolume canvas = canvas_for(c);
    const BinaryVolume dot(Dims::cube(1), 1);
    (void)place_organ(canvas, c, dot, {7, 7, 7}, 2);
    (void)place_organ(canvas, c, dot, {7, 7, 7}, 3);
    EXPECT_EQ(canvas(7, 7, 7), 3);
    EXPECT_THROW(place_organ(canvas, c, dot, {7, 7, 7}, 1), Error);
}

TEST(Placement, BboxCentreLandsOnAnchor)
{
    const ContainerMask c = box_container(16, 0, 16);
    LabelVolume canvas = canvas_for(c);
    BinaryVolume organ(Dims{5, 3, 1});
    organ(1, 1, 0) = 1;
    organ(3, 1, 0) = 1; // bbox x in [1,3], centre 2
    const auto r = place_organ(canvas, c, organ, {8, 8, 8}, 4);
    EXPECT_EQ(r.placed_voxels, 2u);
    EXPECT_EQ(canvas(7, 8, 8), 4);
    EXPECT_EQ(canvas(9, 8, 8), 4);
    EXPECT_EQ(canvas(8, 8, 8), 1);
}

TEST(Placement, RandomPlacementsNeverLeaveContainer)
{
    const auto& f = fixture();
    LabelVolume canvas = canvas_for(f.container);
    Sampler s(RngStream(30));
    for (int t = 0; t < 500; ++t) {
        const auto& inst = sample_instance(f.pool, static_cast<int>(s.index(f.pool.class_count())), s);
        const Index3 p{static_cast<int>(s.index(N)), static_cast<int>(s.index(N)), static_cast<int>(s.index(N))};
        (void)place_organ(canvas, f.container, inst.mask, p, static_cast<Label>(2 + t % 50));
    }
    std::size_t outside = 0, lost = 0;
    for (std::size_t i = 0; i < canvas.size(); ++i) {
        outside += !f.container.mask[i] && canvas[i] != 0;
        lost += f.container.mask[i] && canvas[i] == 0;
    }
    EXPECT_EQ(outside, 0u);
    EXPECT_EQ(lost, 0u);
}

TEST(TransformMask, IdentityIsExactAtMarginOffset)
{
    const auto& inst = fixture().pool.instances(0)[0];
    const BinaryVolume t = transform_mask(inst.mask, {0, 0, 0}, {1, 1, 1}, 2);
    const Dims d = inst.mask.dims();
    ASSERT_EQ(t.dims(), (Dims{d.nx + 4, d.ny + 4, d.nz + 4}));
    EXPECT_EQ(count_nonzero(t), count_nonzero(inst.mask));
    for (int z = 0; z < d.nz; ++z)
        for (int y = 0; y < d.ny; ++y)
            for (int x = 0; x < d.nx; ++x)
                ASSERT_EQ(t(x + 2, y + 2, z + 2), inst.mask(x, y, z));
}

TEST(Subject, ContainmentAndLabelSet)
{
    const auto& f = fixture();
    for (int n = 0; n < 4; ++n) {
        const SubjectLabelMap s = instantiate_subject(f.bp, f.pool, f.container, n, f.ranges, RngStream(40).child(n));
        for (std::size_t i = 0; i < s.prewarp.size(); ++i) {
            const Label v = s.prewarp[i];
            ASSERT_EQ(v != 0, f.container.mask[i] != 0) << i;
            ASSERT_LE(v, f.bp.k() + 1);
        }
        for (Label v : s.labels.storage())
            ASSERT_LE(v, f.bp.k() + 1);
        const auto present = organ_labels_present(s.labels);
        EXPECT_EQ(present, s.expected_organ_labels());
    }
}

TEST(Subject, ClipReportMatchesCanvas)
{
    const auto& f = fixture();
    const SubjectLabelMap s = instantiate_subject(f.bp, f.pool, f.container, 0, f.ranges, RngStream(41));
    std::vector<std::size_t> hist(static_cast<std::size_t>(f.bp.k()) + 2, 0);
    for (Label v : s.prewarp.storage())
        ++hist[v];
    std::set<int> clipped;
    for (const auto& c : s.clip_report) {
        clipped.insert(c.rule);
        if (c.organ_voxels > 0) {
            EXPECT_LT(c.surviving_voxels, c.organ_voxels);
        }
        EXPECT_LE(c.surviving_voxels, c.placed_voxels);
    }
    for (const auto& r : s.rules) {
        EXPECT_EQ(r.surviving_voxels, hist[static_cast<std::size_t>(r.rule) + 2]);
        EXPECT_LE(r.placed_voxels, r.organ_voxels);
        EXPECT_EQ(clipped.count(r.rule) == 1, r.organ_voxels == 0 || r.surviving_voxels < r.organ_voxels);
    }
    for (int rule : s.warp_lost) {
        EXPECT_GT(s.rules[static_cast<std::size_t>(rule)].surviving_voxels, 0u);
        EXPECT_EQ(std::count(s.labels.storage().begin(), s.labels.storage().end(), static_cast<Label>(rule + 2)), 0);
    }
}

TEST(Subject, FinalWarpReproducibleFromRecordedStream)
{
    const auto& f = fixture();
    const RngStream rng = RngStream(42);
    const SubjectLabelMap s = instantiate_subject(f.bp, f.pool, f.container, 0, f.ranges, rng);
    ASSERT_GT(s.final_elastic.alpha, 0.0);
    EXPECT_GE(s.final_elastic.sigma, f.ranges.elastic_sigma.lo);
    EXPECT_LE(s.final_elastic.sigma, f.ranges.elastic_sigma.hi);
    const DisplacementField u = sample_elastic_field(Dims::cube(N), s.final_elastic, rng.child(streams::final_warp).child(1));
    EXPECT_NEAR(u.max_magnitude(), s.final_elastic.alpha, 1e-4);
    std::size_t checked = 0;
    for (int z = 0; z < N; ++z)
        for (int y = 0; y < N; ++y)
            for (int x = 0; x < N; ++x) {
                const std::size_t i = s.labels.index(x, y, z);
                const int sx = detail::round_to_int(x + u.component[0][i]);
                const int sy = detail::round_to_int(y + u.component[1][i]);
                const int sz = detail::round_to_int(z + u.component[2][i]);
                ASSERT_EQ(s.labels[i], s.prewarp.at_or(sx, sy, sz, 0));
                checked += s.labels[i] >= 2;
            }
    EXPECT_GT(checked, 0u);
}

TEST(Subject, MicroTransformWithinBounds)
{
    const auto& f = fixture();
    const ShapePool single = synth_fallback_pool(2, 1, RngStream(50), FallbackPoolParams{.grid = 12});
    OrganRule rule;
    rule.class_id = 1;
    rule.position = {24, 24, 24};
    const int tmax = static_cast<int>(std::ceil(f.ranges.translation.hi));
    std::set<std::array<int, 3>> positions;
    for (std::uint64_t t = 0; t < 200; ++t) {
        const OrganRealization o = realize_organ(rule, single, f.ranges, RngStream(51).child(t));
        EXPECT_EQ(o.instance_index, 0);
        for (int a = 0; a < 3; ++a) {
            EXPECT_LE(std::abs(o.position[a] - 24), tmax);
            EXPECT_GE(o.micro.rotation[a], f.ranges.rotation.lo);
            EXPECT_LE(o.micro.rotation[a], f.ranges.rotation.hi);
            EXPECT_GE(o.micro.scale[a], f.ranges.scale.lo);
            EXPECT_LE(o.micro.scale[a], f.ranges.scale.hi);
        }
        positions.insert({o.position[0], o.position[1], o.position[2]});
    }
    EXPECT_GT(positions.size(), 20u);
}

TEST(Cohort, SubjectsVaryInInstanceChoice)
{
    const auto& f = fixture();
    const Cohort c = instantiate_cohort(f.bp, f.pool, f.container, 8, f.ranges, RngStream(60));
    std::set<std::vector<int>> choices;
    for (const auto& s : c.subjects) {
        std::vector<int> v;
        for (const auto& r : s.rules)
            v.push_back(r.instance_index);
        choices.insert(v);
    }
    EXPECT_GE(choices.size(), 2u);
    EXPECT_NE(c.subjects[0].labels, c.subjects[1].labels);
}

TEST(Cohort, WorkerCountDoesNotChangeOutput)
{
    const auto& f = fixture();
    const Cohort a = instantiate_cohort(f.bp, f.pool, f.container, 6, f.ranges, RngStream(61), 1);
    const Cohort b = instantiate_cohort(f.bp, f.pool, f.container, 6, f.ranges, RngStream(61), 4);
    for (int n = 0; n < 6; ++n) {
        EXPECT_EQ(a.subjects[n].labels, b.subjects[n].labels);
        EXPECT_EQ(a.subjects[n].clip_report, b.subjects[n].clip_report);
        EXPECT_EQ(a.subjects[n].stream_seed, b.subjects[n].stream_seed);
    }
}

TEST(Cohort, ForeignPoolRejected)
{
    const auto& f = fixture();
    const ShapePool other = synth_fallback_pool(4, 3, RngStream(99), FallbackPoolParams{.grid = 16});
    EXPECT_THROW(instantiate_subject(f.bp, other, f.container, 0, f.ranges, RngStream(1)), Error);
    EXPECT_THROW(instantiate_cohort(f.bp, f.pool, f.container, 0, f.ranges, RngStream(1)), Error);
}
