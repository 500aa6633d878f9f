#pragma once

#include <cmath>
#include <string>

#include "synthforge/core/error.hpp"
#include "synthforge/core/rng.hpp"
#include "synthforge/core/volume.hpp"

namespace synthforge {

/// Closed interval for a uniform draw.
struct Range {
    double lo = 0.0;
    double hi = 0.0;

    [[nodiscard]] bool contains(double v) const noexcept { return v >= lo && v <= hi; }
    [[nodiscard]] Range scaled(double f) const noexcept { return {lo * f, hi * f}; }
    double sample(Sampler& s) const { return s.uniform(lo, hi); }

    void validate(const std::string& name) const
    {
        if (!std::isfinite(lo) || !std::isfinite(hi) || lo > hi)
            throw ConfigError(name + ": invalid range [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
    friend bool operator==(const Range&, const Range&) = default;
};

/// Side length the default hyperparameters are stated for.
inline constexpr int reference_size = 128;

/// Per-axis factor dims / 128.
inline Vec3 axis_scale_factors(const Dims& d)
{
    return {d.nx / double(reference_size), d.ny / double(reference_size), d.nz / double(reference_size)};
}

/// Isotropic length factor: dims / 128 for cubes, the geometric mean of the
/// per-axis factors otherwise.
inline double length_scale_factor(const Dims& d)
{
    if (d.nx == d.ny && d.ny == d.nz)
        return d.nx / double(reference_size);
    const Vec3 f = axis_scale_factors(d);
    return std::cbrt(f[0] * f[1] * f[2]);
}

} // namespace synthforge
