#pragma once

#include <cmath>
#include <string>
#include <string_view>

#include "synthforge/core/error.hpp"
#include "synthforge/core/volume.hpp"

namespace synthforge {

enum class PrimitiveKind { ellipsoid, cylinder, cone };

inline std::string_view to_string(PrimitiveKind k)
{
    switch (k) {
    case PrimitiveKind::ellipsoid: return "ellipsoid";
    case PrimitiveKind::cylinder: return "cylinder";
    case PrimitiveKind::cone: return "cone";
    }
    return "?";
}

inline PrimitiveKind primitive_kind_from_string(std::string_view s)
{
    if (s == "ellipsoid") return PrimitiveKind::ellipsoid;
    if (s == "cylinder") return PrimitiveKind::cylinder;
    if (s == "cone") return PrimitiveKind::cone;
    throw Error("unknown primitive kind '" + std::string(s) + "'");
}

/// Analytic solid in voxel units. Ellipsoids use all three semi-axes;
/// cylinders and cones use radii[0..1] for the cross-section and `height`
/// along +z, centred on the origin. A cone's apex sits at the +z end.
struct Primitive {
    PrimitiveKind kind = PrimitiveKind::ellipsoid;
    Vec3 radii{1, 1, 1};
    double height = 0.0;

    static Primitive ellipsoid(double rx, double ry, double rz) { return {PrimitiveKind::ellipsoid, {rx, ry, rz}, 0.0}; }
    static Primitive cylinder(double r, double h) { return {PrimitiveKind::cylinder, {r, r, 0.0}, h}; }
    static Primitive cone(double r, double h) { return {PrimitiveKind::cone, {r, r, 0.0}, h}; }

    void validate() const
    {
        const bool radial_ok = radii[0] > 0.0 && radii[1] > 0.0;
        if (kind == PrimitiveKind::ellipsoid ? !(radial_ok && radii[2] > 0.0) : !(radial_ok && height > 0.0))
            throw Error("degenerate " + std::string(to_string(kind)) + ": extents must be positive");
    }

    /// Whether the offset (dx, dy, dz) from the centre lies inside.
    [[nodiscard]] bool contains(double dx, double dy, double dz) const noexcept
    {
        switch (kind) {
        case PrimitiveKind::ellipsoid: {
            const double a = dx / radii[0], b = dy / radii[1], c = dz / radii[2];
            return a * a + b * b + c * c <= 1.0;
        }
        case PrimitiveKind::cylinder: {
            if (std::abs(dz) > 0.5 * height)
                return false;
            const double a = dx / radii[0], b = dy / radii[1];
            return a * a + b * b <= 1.0;
        }
        case PrimitiveKind::cone: {
            if (std::abs(dz) > 0.5 * height)
                return false;
            const double taper = (0.5 * height - dz) / height; // 1 at base, 0 at apex
            const double a = dx / radii[0], b = dy / radii[1];
            return a * a + b * b <= taper * taper;
        }
        }
        return false;
    }
};

/// Binary rasterization: a voxel is set iff its centre lies inside the solid
/// placed at `center`.
inline BinaryVolume rasterize_primitive(const Primitive& prim, Dims dims, const Vec3& center)
{
    prim.validate();
    BinaryVolume out(dims);
    for (int z = 0; z < dims.nz; ++z)
        for (int y = 0; y < dims.ny; ++y)
            for (int x = 0; x < dims.nx; ++x)
                out(x, y, z) = prim.contains(x - center[0], y - center[1], z - center[2]) ? 1 : 0;
    return out;
}

} // namespace synthforge
