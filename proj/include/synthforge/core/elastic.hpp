#pragma once

#include <array>
#include <cmath>

#include "synthforge/core/error.hpp"
#include "synthforge/core/filter.hpp"
#include "synthforge/core/rng.hpp"
#include "synthforge/core/transform.hpp"
#include "synthforge/core/volume.hpp"

namespace synthforge {

struct ElasticParams {
    double sigma = 1.0; ///< smoothing std (voxels)
    double alpha = 0.0; ///< maximum displacement magnitude (voxels)

    void validate() const
    {
        if (!(sigma > 0.0))
            throw Error("elastic sigma must be > 0");
        if (!(alpha >= 0.0))
            throw Error("elastic alpha must be >= 0");
    }
    friend bool operator==(const ElasticParams&, const ElasticParams&) = default;
};

/// Per-voxel displacement in voxels, one volume per axis.
struct DisplacementField {
    std::array<Volume<float>, 3> component;

    DisplacementField() = default;
    explicit DisplacementField(Dims d) : component{Volume<float>(d), Volume<float>(d), Volume<float>(d)} {}

    [[nodiscard]] const Dims& dims() const noexcept { return component[0].dims(); }

    [[nodiscard]] double magnitude(std::size_t i) const noexcept
    {
        const double a = component[0][i], b = component[1][i], c = component[2][i];
        return std::sqrt(a * a + b * b + c * c);
    }

    [[nodiscard]] double max_magnitude() const noexcept
    {
        double m = 0.0;
        for (std::size_t i = 0; i < component[0].size(); ++i)
            m = std::max(m, magnitude(i));
        return m;
    }
};

/// Smoothed i.i.d. U(-1, 1) noise per axis (Gaussian, std = sigma,
/// zero-padded), rescaled so that the largest displacement norm is alpha.
inline DisplacementField sample_elastic_field(Dims dims, const ElasticParams& params, const RngStream& rng)
{
    params.validate();
    DisplacementField field(dims);
    if (params.alpha == 0.0)
        return field;

    Sampler sampler(rng);
    const auto kernel = gaussian_kernel(params.sigma);
    for (auto& comp : field.component) {
        for (auto& v : comp.storage())
            v = static_cast<float>(sampler.uniform(-1.0, 1.0));
        for (int axis = 0; axis < 3; ++axis)
            convolve_axis(comp, axis, kernel, Border::zero);
    }
    const double peak = field.max_magnitude();
    if (peak == 0.0)
        return DisplacementField(dims);
    const double gain = params.alpha / peak;
    for (auto& comp : field.component)
        for (auto& v : comp.storage())
            v = static_cast<float>(v * gain);
    return field;
}

/// Backward warp: output(v) = input(v + field(v)); off-grid samples are 0.
template <typename T>
Volume<T> warp_volume(const Volume<T>& vol, const DisplacementField& field, Interpolation interp)
{
    if (field.dims() != vol.dims())
        throw Error("displacement field dims " + to_string(field.dims()) + " do not match volume dims " +
                    to_string(vol.dims()));
    if (is_label_kind_v<T> && interp == Interpolation::trilinear)
        throw Error("trilinear interpolation is not allowed on label volumes");
    const Dims d = vol.dims();
    Volume<T> out(d);
    for (int z = 0; z < d.nz; ++z)
        for (int y = 0; y < d.ny; ++y)
            for (int x = 0; x < d.nx; ++x) {
                const std::size_t i = vol.index(x, y, z);
                const Vec3 p{x + static_cast<double>(field.component[0][i]),
                             y + static_cast<double>(field.component[1][i]),
                             z + static_cast<double>(field.component[2][i])};
                if (interp == Interpolation::nearest)
                    out[i] = detail::sample_nearest(vol, p);
                else
                    out[i] = static_cast<T>(detail::sample_trilinear(vol, p));
            }
    return out;
}

} // namespace synthforge
