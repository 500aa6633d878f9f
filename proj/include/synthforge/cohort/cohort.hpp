#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "json.hpp"

#include "synthforge/blueprint/blueprint.hpp"
#include "synthforge/container/container.hpp"
#include "synthforge/core/elastic.hpp"
#include "synthforge/core/error.hpp"
#include "synthforge/core/morphology.hpp"
#include "synthforge/core/parallel.hpp"
#include "synthforge/core/range.hpp"
#include "synthforge/core/rng.hpp"
#include "synthforge/core/transform.hpp"
#include "synthforge/core/volume.hpp"
#include "synthforge/shapepool/shape_pool.hpp"

namespace synthforge {

/// Subject-level variation ranges. Translation and the final elastic warp
/// are in voxels.
struct SubjectRanges {
    Range translation{-5.0, 5.0};
    Range rotation{-std::numbers::pi / 20.0, std::numbers::pi / 20.0};
    Range scale{0.95, 1.05};
    Range elastic_sigma{15.0, 25.0};
    Range elastic_alpha{15.0, 25.0};

    [[nodiscard]] SubjectRanges scaled(double f) const
    {
        SubjectRanges r = *this;
        r.translation = translation.scaled(f);
        r.elastic_sigma = elastic_sigma.scaled(f);
        r.elastic_alpha = elastic_alpha.scaled(f);
        return r;
    }

    static SubjectRanges for_dims(const Dims& dims) { return SubjectRanges{}.scaled(length_scale_factor(dims)); }

    void validate() const
    {
        translation.validate("cohort.translation");
        rotation.validate("cohort.rotation");
        scale.validate("cohort.scale");
        elastic_sigma.validate("cohort.elastic_sigma");
        elastic_alpha.validate("cohort.elastic_alpha");
        if (!(scale.lo > 0.0) || !(elastic_sigma.lo > 0.0) || elastic_alpha.lo < 0.0)
            throw ConfigError("cohort scale and elastic sigma must be positive, alpha non-negative");
    }
};

/// Per-subject perturbation of one organ.
struct MicroTransform {
    Vec3 translation{0, 0, 0};
    Vec3 rotation{0, 0, 0};
    Vec3 scale{1, 1, 1};

    friend bool operator==(const MicroTransform&, const MicroTransform&) = default;
};

inline MicroTransform sample_micro_transform(const SubjectRanges& ranges, Sampler& s)
{
    MicroTransform m;
    for (auto& t : m.translation)
        t = ranges.translation.sample(s);
    for (auto& a : m.rotation)
        a = ranges.rotation.sample(s);
    for (auto& f : m.scale)
        f = ranges.scale.sample(s);
    return m;
}

/// Rotate and scale a mask about its grid centre onto a new grid large
/// enough to hold the result plus `margin` background voxels per side. The
/// grid grows by whole voxels on each side, so the identity reproduces the
/// input exactly at a fixed offset.
inline BinaryVolume transform_mask(const BinaryVolume& mask, const Vec3& rotation, const Vec3& scale, int margin)
{
    AffineTransform xf;
    xf.rotation = rotation;
    xf.scale = scale;
    const AffineMatrix fwd = xf.matrix(); // pivot at origin: pure linear part
    const Dims d = mask.dims();
    const Vec3 half{d.nx * 0.5, d.ny * 0.5, d.nz * 0.5};
    std::array<int, 3> pad{};
    for (int i = 0; i < 3; ++i) {
        double h = 0.0;
        for (int j = 0; j < 3; ++j)
            h += std::abs(fwd.linear[i][j]) * half[j];
        pad[i] = std::max(0, static_cast<int>(std::ceil(h - half[i] - 1e-9))) + margin;
    }
    const Dims out{d.nx + 2 * pad[0], d.ny + 2 * pad[1], d.nz + 2 * pad[2]};

    const AffineMatrix inv = fwd.inverse();
    const Vec3 cin = grid_center(d);
    const Vec3 cout = grid_center(out);
    AffineMatrix out_to_in;
    out_to_in.linear = inv.linear;
    for (int i = 0; i < 3; ++i)
        out_to_in.offset[i] = cin[i] - (inv.linear[i][0] * cout[0] + inv.linear[i][1] * cout[1] + inv.linear[i][2] * cout[2]);
    return resample_affine(mask, out_to_in, out, Interpolation::nearest);
}

/// Voxel counts for one placement.
struct PlacementResult {
    std::size_t organ_voxels = 0;
    std::size_t placed_voxels = 0; ///< organ voxels that landed inside the container

    [[nodiscard]] bool fully_clipped() const noexcept { return placed_voxels == 0; }
};

/// Centre of the organ's foreground bounding box, rounded down.
inline Index3 bbox_center(const BBox& b)
{
    return {b.lo[0] + (b.hi[0] - b.lo[0]) / 2, b.lo[1] + (b.hi[1] - b.lo[1]) / 2, b.lo[2] + (b.hi[2] - b.lo[2]) / 2};
}

/// Write `label` where the organ (its bbox centre moved to `position`)
/// overlaps container foreground. Later placements overwrite earlier ones;
/// voxels outside the container are never touched.
inline PlacementResult place_organ(LabelVolume& canvas, const ContainerMask& container, const BinaryVolume& organ,
                                   const Index3& position, Label label)
{
    if (label < 2)
        throw Error("organ labels start at 2");
    if (canvas.dims() != container.mask.dims())
        throw Error("canvas and container dims differ");
    const BBox box = bounding_box(organ);
    if (box.empty())
        throw Error("cannot place an empty organ mask");
    const Index3 c = bbox_center(box);
    const Index3 off{position[0] - c[0], position[1] - c[1], position[2] - c[2]};

    PlacementResult r;
    for (int z = box.lo[2]; z <= box.hi[2]; ++z)
        for (int y = box.lo[1]; y <= box.hi[1]; ++y)
            for (int x = box.lo[0]; x <= box.hi[0]; ++x) {
                if (!organ(x, y, z))
                    continue;
                ++r.organ_voxels;
                const int cx = x + off[0], cy = y + off[1], cz = z + off[2];
                if (!container.contains(cx, cy, cz))
                    continue;
                canvas(cx, cy, cz) = label;
                ++r.placed_voxels;
            }
    return r;
}

/// A rule's transformed organ for one subject, before placement.
struct OrganRealization {
    int instance_index = 0;       ///< index within A_{c_j}
    int instance_subject_id = 0;  ///< p of the sampled a_{c_j,p}
    MicroTransform micro;
    BinaryVolume mask;            ///< may be empty after erosion
    Index3 position{0, 0, 0};     ///< anchor including the micro translation
};

/// Instance draw, base transform (rotation + scale, then morphology), micro
/// transform about the organ centre. The micro translation shifts the anchor
/// by whole voxels.
inline OrganRealization realize_organ(const OrganRule& rule, const ShapePool& pool, const SubjectRanges& ranges,
                                      const RngStream& rule_rng)
{
    OrganRealization out;
    Sampler pick(rule_rng.child(streams::instance));
    const auto& list = pool.instances(rule.class_id);
    out.instance_index = static_cast<int>(pick.index(list.size()));
    const ShapeInstance& inst = list[static_cast<std::size_t>(out.instance_index)];
    out.instance_subject_id = inst.subject_id;

    BinaryVolume organ = transform_mask(inst.mask, rule.base.rotation, rule.base.scale, rule.base.iterations + 1);
    organ = morphology(organ, rule.base.morph, rule.base.iterations);

    Sampler micro(rule_rng.child(streams::micro));
    out.micro = sample_micro_transform(ranges, micro);
    out.mask = transform_mask(organ, out.micro.rotation, out.micro.scale, 1);
    for (int i = 0; i < 3; ++i)
        out.position[i] = rule.position[static_cast<std::size_t>(i)] + detail::round_to_int(out.micro.translation[i]);
    return out;
}

/// Per-rule outcome in one subject.
struct RuleRecord {
    int rule = 0;
    int class_id = 0;
    int instance_index = 0;
    int instance_subject_id = 0;
    MicroTransform micro;
    std::size_t organ_voxels = 0;
    std::size_t placed_voxels = 0;
    std::size_t surviving_voxels = 0; ///< still carrying the rule label before the final warp
};

/// Rules that lost voxels before the final warp, to the container boundary
/// or to later rules overwriting them.
struct ClipEntry {
    int rule = 0;
    std::size_t organ_voxels = 0;
    std::size_t placed_voxels = 0;
    std::size_t surviving_voxels = 0;

    [[nodiscard]] double fraction_clipped() const noexcept
    {
        return organ_voxels == 0 ? 1.0 : 1.0 - static_cast<double>(surviving_voxels) / static_cast<double>(organ_voxels);
    }
    [[nodiscard]] bool vanished() const noexcept { return surviving_voxels == 0; }
    friend bool operator==(const ClipEntry&, const ClipEntry&) = default;
};

struct SubjectLabelMap {
    int subject = 0;
    std::uint64_t stream_seed = 0;
    LabelVolume labels;   ///< after the final elastic warp
    LabelVolume prewarp;  ///< canvas before the final warp
    std::vector<RuleRecord> rules;
    ElasticParams final_elastic;
    std::vector<ClipEntry> clip_report;
    std::vector<int> warp_lost; ///< rules present before the final warp but not after

    /// Labels j + 2 expected after the final warp.
    [[nodiscard]] std::vector<Label> expected_organ_labels() const
    {
        std::vector<Label> out;
        for (const auto& r : rules)
            if (r.surviving_voxels > 0 && !std::binary_search(warp_lost.begin(), warp_lost.end(), r.rule))
                out.push_back(static_cast<Label>(r.rule + 2));
        return out;
    }
};

struct Cohort {
    Blueprint blueprint;
    std::vector<SubjectLabelMap> subjects;

    [[nodiscard]] int n() const noexcept { return static_cast<int>(subjects.size()); }
};

/// Sorted distinct labels >= 2 present in a label map.
inline std::vector<Label> organ_labels_present(const LabelVolume& labels)
{
    std::vector<std::uint8_t> seen(65536, 0);
    for (Label v : labels.storage())
        seen[v] = 1;
    std::vector<Label> out;
    for (std::size_t v = 2; v < seen.size(); ++v)
        if (seen[v])
            out.push_back(static_cast<Label>(v));
    return out;
}

/// Build subject map S_n from the blueprint: container canvas, per-rule
/// organ placement in rule order, then one elastic warp of the whole map.
inline SubjectLabelMap instantiate_subject(const Blueprint& bp, const ShapePool& pool, const ContainerMask& container,
                                           int n, const SubjectRanges& ranges, const RngStream& rng)
{
    if (bp.pool_fingerprint != pool.fingerprint())
        throw Error("blueprint was sampled from a different shape pool (fingerprint mismatch)");
    const Dims dims = container.mask.dims();

    SubjectLabelMap s;
    s.subject = n;
    s.stream_seed = rng.seed();
    LabelVolume canvas(dims);
    for (std::size_t i = 0; i < canvas.size(); ++i)
        canvas[i] = container.mask[i] ? 1 : 0;

    const RngStream rules_rng = rng.child(streams::rules);
    s.rules.reserve(bp.rules.size());
    for (const OrganRule& rule : bp.rules) {
        OrganRealization org = realize_organ(rule, pool, ranges, rules_rng.child(static_cast<std::uint64_t>(rule.index)));
        RuleRecord rec;
        rec.rule = rule.index;
        rec.class_id = rule.class_id;
        rec.instance_index = org.instance_index;
        rec.instance_subject_id = org.instance_subject_id;
        rec.micro = org.micro;
        if (count_nonzero(org.mask) > 0) {
            const PlacementResult pr = place_organ(canvas, container, org.mask, org.position, rule.label());
            rec.organ_voxels = pr.organ_voxels;
            rec.placed_voxels = pr.placed_voxels;
        }
        s.rules.push_back(rec);
    }

    std::vector<std::size_t> hist(static_cast<std::size_t>(bp.k()) + 2, 0);
    for (Label v : canvas.storage())
        if (v < hist.size())
            ++hist[v];
    for (auto& rec : s.rules) {
        rec.surviving_voxels = hist[static_cast<std::size_t>(rec.rule) + 2];
        if (rec.organ_voxels == 0 || rec.surviving_voxels < rec.organ_voxels)
            s.clip_report.push_back({rec.rule, rec.organ_voxels, rec.placed_voxels, rec.surviving_voxels});
    }

    const RngStream warp_rng = rng.child(streams::final_warp);
    Sampler ws(warp_rng.child(0));
    s.final_elastic.sigma = ranges.elastic_sigma.sample(ws);
    s.final_elastic.alpha = ranges.elastic_alpha.sample(ws);
    if (s.final_elastic.alpha > 0.0)
        s.labels = warp_volume(canvas, sample_elastic_field(dims, s.final_elastic, warp_rng.child(1)), Interpolation::nearest);
    else
        s.labels = canvas;
    s.prewarp = std::move(canvas);

    const auto after = organ_labels_present(s.labels);
    for (const auto& rec : s.rules)
        if (rec.surviving_voxels > 0 && !std::binary_search(after.begin(), after.end(), static_cast<Label>(rec.rule + 2)))
            s.warp_lost.push_back(rec.rule);
    return s;
}

/// N subjects from one blueprint; subject n draws from rng.child(n), so the
/// result does not depend on `workers`.
inline Cohort instantiate_cohort(const Blueprint& bp, const ShapePool& pool, const ContainerMask& container, int n_subjects,
                                 const SubjectRanges& ranges, const RngStream& rng, int workers = 1)
{
    if (n_subjects < 1)
        throw Error("a cohort needs at least one subject");
    Cohort c;
    c.blueprint = bp;
    c.subjects.resize(static_cast<std::size_t>(n_subjects));
    parallel_for(c.subjects.size(), workers, [&](std::size_t i) {
        c.subjects[i] = instantiate_subject(bp, pool, container, static_cast<int>(i), ranges, rng.child(i));
    });
    return c;
}

inline void to_json(nlohmann::json& j, const MicroTransform& m)
{
    j = {{"translation", m.translation}, {"rotation", m.rotation}, {"scale", m.scale}};
}

inline void from_json(const nlohmann::json& j, MicroTransform& m)
{
    m.translation = j.at("translation").get<Vec3>();
    m.rotation = j.at("rotation").get<Vec3>();
    m.scale = j.at("scale").get<Vec3>();
}

inline void to_json(nlohmann::json& j, const ClipEntry& c)
{
    j = {{"rule", c.rule},
         {"organ_voxels", c.organ_voxels},
         {"placed_voxels", c.placed_voxels},
         {"surviving_voxels", c.surviving_voxels},
         {"fraction_clipped", c.fraction_clipped()}};
}

inline void from_json(const nlohmann::json& j, ClipEntry& c)
{
    c.rule = j.at("rule").get<int>();
    c.organ_voxels = j.at("organ_voxels").get<std::size_t>();
    c.placed_voxels = j.at("placed_voxels").get<std::size_t>();
    c.surviving_voxels = j.at("surviving_voxels").get<std::size_t>();
}

} // namespace synthforge
