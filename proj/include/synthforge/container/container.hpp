#pragma once

#include <cstdint>
#include <numbers>
#include <string>

#include "json.hpp"

#include "synthforge/core/elastic.hpp"
#include "synthforge/core/error.hpp"
#include "synthforge/core/primitive.hpp"
#include "synthforge/core/range.hpp"
#include "synthforge/core/rng.hpp"
#include "synthforge/core/transform.hpp"
#include "synthforge/core/volume.hpp"

namespace synthforge {

/// Sampling ranges for the container, in voxels for the grid they were
/// scaled to.
struct ContainerRanges {
    Range radius{40.0, 60.0};
    Range height{50.0, 120.0};
    Range rotation{-0.2 * std::numbers::pi, 0.2 * std::numbers::pi};
    Range scale{0.8, 1.2};
    Range elastic_sigma{15.0, 30.0};
    Range elastic_alpha{15.0, 30.0};

    /// Spatial quantities multiplied by `f`; rotation and scale untouched.
    [[nodiscard]] ContainerRanges scaled(double f) const
    {
        ContainerRanges r = *this;
        r.radius = radius.scaled(f);
        r.height = height.scaled(f);
        r.elastic_sigma = elastic_sigma.scaled(f);
        r.elastic_alpha = elastic_alpha.scaled(f);
        return r;
    }

    /// Reference ranges at 128^3 rescaled to `dims`.
    static ContainerRanges for_dims(const Dims& dims) { return ContainerRanges{}.scaled(length_scale_factor(dims)); }

    void validate() const
    {
        radius.validate("container.radius");
        height.validate("container.height");
        rotation.validate("container.rotation");
        scale.validate("container.scale");
        elastic_sigma.validate("container.elastic_sigma");
        elastic_alpha.validate("container.elastic_alpha");
        if (!(radius.lo > 0.0) || !(height.lo > 0.0) || !(scale.lo > 0.0) || !(elastic_sigma.lo > 0.0) ||
            elastic_alpha.lo < 0.0)
            throw ConfigError("container ranges must be positive (alpha non-negative)");
    }
};

/// One realized container draw.
struct ContainerSpec {
    PrimitiveKind kind = PrimitiveKind::ellipsoid;
    double radius = 50.0;
    double height = 80.0;
    Vec3 rotation{0, 0, 0};
    Vec3 scale{1, 1, 1};
    ElasticParams elastic{20.0, 0.0};

    friend bool operator==(const ContainerSpec&, const ContainerSpec&) = default;

    /// Ellipsoids use the radius on every axis; cylinders and cones use it
    /// as base radius with `height` along z.
    [[nodiscard]] Primitive primitive() const
    {
        switch (kind) {
        case PrimitiveKind::ellipsoid: return Primitive::ellipsoid(radius, radius, radius);
        case PrimitiveKind::cylinder: return Primitive::cylinder(radius, height);
        case PrimitiveKind::cone: return Primitive::cone(radius, height);
        }
        return Primitive::ellipsoid(radius, radius, radius);
    }
};

inline void to_json(nlohmann::json& j, const ContainerSpec& s)
{
    j = {{"kind", std::string(to_string(s.kind))},
         {"radius", s.radius},
         {"height", s.height},
         {"rotation", s.rotation},
         {"scale", s.scale},
         {"elastic_sigma", s.elastic.sigma},
         {"elastic_alpha", s.elastic.alpha}};
}

inline void from_json(const nlohmann::json& j, ContainerSpec& s)
{
    s.kind = primitive_kind_from_string(j.at("kind").get<std::string>());
    s.radius = j.at("radius").get<double>();
    s.height = j.at("height").get<double>();
    s.rotation = j.at("rotation").get<Vec3>();
    s.scale = j.at("scale").get<Vec3>();
    s.elastic = {j.at("elastic_sigma").get<double>(), j.at("elastic_alpha").get<double>()};
}

/// Binary scaffold M_container and the draw that produced it.
struct ContainerMask {
    BinaryVolume mask;
    ContainerSpec spec;
    int attempt = 0; ///< retry index that succeeded

    [[nodiscard]] bool contains(int x, int y, int z) const noexcept { return mask.at_or(x, y, z) != 0; }
};

inline constexpr double container_min_fraction = 0.005;
inline constexpr double container_max_fraction = 0.95;
inline constexpr int container_max_attempts = 5;

inline ContainerSpec sample_container_spec(const ContainerRanges& ranges, const RngStream& rng)
{
    Sampler s(rng);
    ContainerSpec spec;
    spec.kind = static_cast<PrimitiveKind>(s.uniform_int(0, 2));
    spec.radius = ranges.radius.sample(s);
    spec.height = ranges.height.sample(s);
    for (auto& a : spec.rotation)
        a = ranges.rotation.sample(s);
    for (auto& f : spec.scale)
        f = ranges.scale.sample(s);
    spec.elastic.sigma = ranges.elastic_sigma.sample(s);
    spec.elastic.alpha = ranges.elastic_alpha.sample(s);
    return spec;
}

inline ContainerSpec sample_container_spec(const Dims& dims, const RngStream& rng)
{
    if (dims.nx < 32 || dims.ny < 32 || dims.nz < 32)
        throw ConfigError("container dims must be at least 32 per axis, got " + to_string(dims));
    return sample_container_spec(ContainerRanges::for_dims(dims), rng);
}

/// Rasterize at the grid centre, rotate and scale about the centre, then
/// warp elastically. Throws ResampleSignal when the result is empty or its
/// foreground fraction falls outside (0.5%, 95%).
inline ContainerMask generate_container(const ContainerSpec& spec, const Dims& dims, const RngStream& rng)
{
    const Vec3 center = grid_center(dims);
    BinaryVolume mask = rasterize_primitive(spec.primitive(), dims, center);

    AffineTransform xf;
    xf.rotation = spec.rotation;
    xf.scale = spec.scale;
    xf.center = center;
    mask = apply_affine(mask, xf, Interpolation::nearest);

    if (spec.elastic.alpha > 0.0) {
        const DisplacementField field = sample_elastic_field(dims, spec.elastic, rng);
        mask = warp_volume(mask, field, Interpolation::nearest);
    }

    const double frac = foreground_fraction(mask);
    if (!(frac > container_min_fraction && frac < container_max_fraction))
        throw ResampleSignal("degenerate container: foreground fraction " + std::to_string(frac));
    return ContainerMask{std::move(mask), spec, 0};
}

/// Sample and generate with up to five attempts, attempt a drawing from
/// rng.child(a).
inline ContainerMask generate_container_with_retry(const ContainerRanges& ranges, const Dims& dims,
                                                   const RngStream& rng)
{
    std::string last;
    for (int a = 0; a < container_max_attempts; ++a) {
        const RngStream attempt = rng.child(static_cast<std::uint64_t>(a));
        const ContainerSpec spec = sample_container_spec(ranges, attempt.child(0));
        try {
            ContainerMask c = generate_container(spec, dims, attempt.child(1));
            c.attempt = a;
            return c;
        } catch (const ResampleSignal& e) {
            last = e.what();
        }
    }
    throw Error("container generation failed after " + std::to_string(container_max_attempts) + " attempts (" + last + ")");
}

} // namespace synthforge
