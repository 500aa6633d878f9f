#pragma once

#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "json.hpp"

#include "synthforge/container/container.hpp"
#include "synthforge/core/error.hpp"
#include "synthforge/core/morphology.hpp"
#include "synthforge/core/range.hpp"
#include "synthforge/core/rng.hpp"
#include "synthforge/core/volume.hpp"
#include "synthforge/shapepool/shape_pool.hpp"

namespace synthforge {

/// Cohort-wide transformation T_j of one organ rule.
struct BaseTransform {
    Vec3 rotation{0, 0, 0};
    Vec3 scale{1, 1, 1};
    MorphOp morph = MorphOp::dilate;
    int iterations = 1;

    friend bool operator==(const BaseTransform&, const BaseTransform&) = default;
};

/// Rule j: which class to draw from, where to anchor it, how to deform it.
/// Its label in subject maps is j + 2.
struct OrganRule {
    int index = 0;
    int class_id = 0;
    Index3 position{0, 0, 0};
    BaseTransform base;

    [[nodiscard]] Label label() const noexcept { return static_cast<Label>(index + 2); }
    friend bool operator==(const OrganRule&, const OrganRule&) = default;
};

/// Reusable layout template B shared by every subject of a cohort.
struct Blueprint {
    std::vector<OrganRule> rules;
    ContainerSpec container;
    std::string pool_fingerprint;

    [[nodiscard]] int k() const noexcept { return static_cast<int>(rules.size()); }
    friend bool operator==(const Blueprint&, const Blueprint&) = default;
};

struct BlueprintRanges {
    int k_min = 30;
    int k_max = 100;
    Range rotation{0.0, 2.0 * std::numbers::pi};
    Range scale{0.5, 1.5};
    int iterations_min = 1;
    int iterations_max = 3;

    void validate() const
    {
        if (k_min < 1 || k_max < k_min)
            throw ConfigError("blueprint.k range must satisfy 1 <= k_min <= k_max");
        if (k_max > 65533)
            throw ConfigError("blueprint.k_max exceeds the label id space");
        rotation.validate("blueprint.rotation");
        scale.validate("blueprint.scale");
        if (!(scale.lo > 0.0))
            throw ConfigError("blueprint.scale must be positive");
        if (iterations_min < 1 || iterations_max > 3 || iterations_max < iterations_min)
            throw ConfigError("blueprint.morph_iterations must lie in [1, 3]");
    }
};

inline constexpr int blueprint_schema_version = 1;

/// Linear indices of container-foreground voxels, ascending.
inline std::vector<std::size_t> foreground_indices(const BinaryVolume& mask)
{
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < mask.size(); ++i)
        if (mask[i])
            out.push_back(i);
    return out;
}

inline Blueprint sample_blueprint(const ShapePool& pool, const ContainerMask& container, const BlueprintRanges& ranges,
                                  const RngStream& rng)
{
    if (pool.empty())
        throw Error("cannot sample a blueprint from an empty shape pool");
    const auto anchors = foreground_indices(container.mask);
    if (anchors.empty())
        throw Error("cannot sample a blueprint inside an empty container");

    Sampler s(rng);
    Blueprint bp;
    bp.container = container.spec;
    bp.pool_fingerprint = pool.fingerprint();
    const auto k = static_cast<int>(s.uniform_int(ranges.k_min, ranges.k_max));
    bp.rules.reserve(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) {
        OrganRule rule;
        rule.index = j;
        rule.class_id = static_cast<int>(s.uniform_int(0, static_cast<std::int64_t>(pool.class_count()) - 1));
        rule.position = container.mask.coords(anchors[s.index(anchors.size())]);
        for (auto& a : rule.base.rotation)
            a = ranges.rotation.sample(s);
        for (auto& f : rule.base.scale)
            f = ranges.scale.sample(s);
        rule.base.morph = static_cast<MorphOp>(s.uniform_int(0, 3));
        rule.base.iterations = static_cast<int>(s.uniform_int(ranges.iterations_min, ranges.iterations_max));
        bp.rules.push_back(rule);
    }
    return bp;
}

inline Blueprint sample_blueprint(const ShapePool& pool, const ContainerMask& container, const RngStream& rng)
{
    return sample_blueprint(pool, container, BlueprintRanges{}, rng);
}

inline void to_json(nlohmann::json& j, const OrganRule& r)
{
    j = {{"index", r.index},
         {"class_id", r.class_id},
         {"position", r.position},
         {"rotation", r.base.rotation},
         {"scale", r.base.scale},
         {"morph_op", std::string(to_string(r.base.morph))},
         {"morph_iterations", r.base.iterations}};
}

inline void from_json(const nlohmann::json& j, OrganRule& r)
{
    r.index = j.at("index").get<int>();
    r.class_id = j.at("class_id").get<int>();
    r.position = j.at("position").get<Index3>();
    r.base.rotation = j.at("rotation").get<Vec3>();
    r.base.scale = j.at("scale").get<Vec3>();
    r.base.morph = morph_op_from_string(j.at("morph_op").get<std::string>());
    r.base.iterations = j.at("morph_iterations").get<int>();
}

inline void to_json(nlohmann::json& j, const Blueprint& bp)
{
    j = {{"schema_version", blueprint_schema_version},
         {"k", bp.k()},
         {"rules", bp.rules},
         {"container", bp.container},
         {"pool_fingerprint", bp.pool_fingerprint}};
}

inline void from_json(const nlohmann::json& j, Blueprint& bp)
{
    if (j.at("schema_version").get<int>() != blueprint_schema_version)
        throw Error("unsupported blueprint schema version");
    bp.rules = j.at("rules").get<std::vector<OrganRule>>();
    bp.container = j.at("container").get<ContainerSpec>();
    bp.pool_fingerprint = j.at("pool_fingerprint").get<std::string>();
    if (j.at("k").get<int>() != bp.k())
        throw Error("blueprint k does not match its rule count");
    for (int i = 0; i < bp.k(); ++i)
        if (bp.rules[static_cast<std::size_t>(i)].index != i)
            throw Error("blueprint rule indices must be dense 0..K-1");
}

/// Canonical text: compact JSON with sorted keys and shortest round-trip
/// float formatting, so equal blueprints serialize to identical bytes.
inline std::string serialize_blueprint(const Blueprint& bp)
{
    return nlohmann::json(bp).dump();
}

inline Blueprint deserialize_blueprint(const std::string& text)
{
    try {
        return nlohmann::json::parse(text).get<Blueprint>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("malformed blueprint record: ") + e.what());
    }
}

} // namespace synthforge
