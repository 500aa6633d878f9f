#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "synthforge/blueprint/blueprint.hpp"
#include "synthforge/core/error.hpp"
#include "synthforge/core/filter.hpp"
#include "synthforge/core/range.hpp"
#include "synthforge/core/rng.hpp"
#include "synthforge/core/volume.hpp"

namespace synthforge {

struct GaussianComponent {
    double mean = 0.0;
    double variance = 0.0;

    friend bool operator==(const GaussianComponent&, const GaussianComponent&) = default;
};

/// Cohort-wide intensity model: one component per nonzero label, where
/// component i belongs to label i + 1 (label 1 is the container).
struct GmmSpec {
    std::vector<GaussianComponent> components;

    [[nodiscard]] std::size_t size() const noexcept { return components.size(); }
    [[nodiscard]] bool has(Label label) const noexcept { return label >= 1 && label <= components.size(); }
    [[nodiscard]] const GaussianComponent& at(Label label) const
    {
        if (!has(label))
            throw Error("no GMM component for label " + std::to_string(label));
        return components[label - 1u];
    }
    friend bool operator==(const GmmSpec&, const GmmSpec&) = default;
};

struct GmmRanges {
    Range mean{0.0, 255.0};
    Range variance{0.0, 5.0};

    void validate() const
    {
        mean.validate("gmm.mean");
        variance.validate("gmm.variance");
        if (variance.lo < 0.0)
            throw ConfigError("gmm.variance must be non-negative");
    }
};

/// K + 1 components, container first, drawn once per cohort.
inline GmmSpec sample_gmm_spec(const Blueprint& bp, const GmmRanges& ranges, const RngStream& rng)
{
    Sampler s(rng);
    GmmSpec g;
    g.components.resize(static_cast<std::size_t>(bp.k()) + 1);
    for (auto& c : g.components) {
        c.mean = ranges.mean.sample(s);
        c.variance = ranges.variance.sample(s);
    }
    return g;
}

inline GmmSpec sample_gmm_spec(const Blueprint& bp, const RngStream& rng) { return sample_gmm_spec(bp, GmmRanges{}, rng); }

/// Voxel-wise draw from the label's component; background stays 0.
inline IntensityVolume render_intensity(const LabelVolume& labels, const GmmSpec& gmm, const RngStream& rng)
{
    std::vector<Label> missing;
    {
        std::vector<std::uint8_t> seen(65536, 0);
        for (Label v : labels.storage())
            seen[v] = 1;
        for (std::size_t v = 1; v < seen.size(); ++v)
            if (seen[v] && !gmm.has(static_cast<Label>(v)))
                missing.push_back(static_cast<Label>(v));
    }
    if (!missing.empty()) {
        std::string ids;
        for (Label v : missing)
            ids += (ids.empty() ? "" : ", ") + std::to_string(v);
        throw Error("labels without a GMM component: " + ids);
    }

    std::vector<double> sd(gmm.size());
    for (std::size_t i = 0; i < gmm.size(); ++i)
        sd[i] = std::sqrt(gmm.components[i].variance);

    Sampler s(rng);
    IntensityVolume img(labels.dims());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const Label v = labels[i];
        if (v == 0)
            continue;
        img[i] = static_cast<float>(s.normal(gmm.components[v - 1u].mean, sd[v - 1u]));
    }
    return img;
}

/// Post-render augmentation ranges. These are project defaults;
/// they follow common label-to-image synthesis practice.
struct AugmentationRanges {
    bool enabled = true;
    int bias_grid_min = 4;
    int bias_grid_max = 8;
    Range bias_amplitude{0.0, 0.4};
    Range log_gamma{-0.35, 0.35};
    Range resolution{1.0, 3.0};
    Range noise_std{0.0, 4.0};

    void validate() const
    {
        if (bias_grid_min < 2 || bias_grid_max < bias_grid_min)
            throw ConfigError("augment.bias_grid must satisfy 2 <= min <= max");
        bias_amplitude.validate("augment.bias_amplitude");
        log_gamma.validate("augment.log_gamma");
        resolution.validate("augment.resolution");
        noise_std.validate("augment.noise_std");
        if (bias_amplitude.lo < 0.0 || resolution.lo < 1.0 || noise_std.lo < 0.0)
            throw ConfigError("augment ranges: amplitude >= 0, resolution >= 1, noise >= 0 required");
    }
};

/// One subject's augmentation draw.
struct AugmentationParams {
    int bias_grid = 4;
    double bias_amplitude = 0.0;
    double gamma = 1.0;
    Vec3 resolution{1, 1, 1};
    double noise_std = 0.0;

    static AugmentationParams identity() { return {}; }
    friend bool operator==(const AugmentationParams&, const AugmentationParams&) = default;
};

inline AugmentationParams sample_augmentation(const AugmentationRanges& ranges, const RngStream& rng)
{
    if (!ranges.enabled)
        return AugmentationParams::identity();
    Sampler s(rng);
    AugmentationParams p;
    p.bias_grid = static_cast<int>(s.uniform_int(ranges.bias_grid_min, ranges.bias_grid_max));
    p.bias_amplitude = ranges.bias_amplitude.sample(s);
    p.gamma = std::exp(ranges.log_gamma.sample(s));
    for (auto& f : p.resolution)
        f = ranges.resolution.sample(s);
    p.noise_std = ranges.noise_std.sample(s);
    return p;
}

namespace detail {

/// Linear resample of every line along `axis` to `m` samples, end points
/// aligned.
inline IntensityVolume resize_axis(const IntensityVolume& in, int axis, int m)
{
    const Dims d = in.dims();
    const int n = d[axis];
    if (m == n)
        return in;
    Dims od = d;
    (axis == 0 ? od.nx : axis == 1 ? od.ny : od.nz) = m;
    IntensityVolume out(od);
    std::vector<int> i0(static_cast<std::size_t>(m));
    std::vector<double> w(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
        const double t = m == 1 ? 0.5 * (n - 1) : static_cast<double>(i) * (n - 1) / (m - 1);
        const int lo = std::min(static_cast<int>(std::floor(t)), n - 1);
        i0[static_cast<std::size_t>(i)] = lo;
        w[static_cast<std::size_t>(i)] = t - lo;
    }
    for (int z = 0; z < od.nz; ++z)
        for (int y = 0; y < od.ny; ++y)
            for (int x = 0; x < od.nx; ++x) {
                Index3 a{x, y, z};
                const int i = a[static_cast<std::size_t>(axis)];
                const int lo = i0[static_cast<std::size_t>(i)];
                const double f = w[static_cast<std::size_t>(i)];
                a[static_cast<std::size_t>(axis)] = lo;
                const double v0 = in(a[0], a[1], a[2]);
                double v = v0;
                if (f > 0.0 && lo + 1 < n) {
                    a[static_cast<std::size_t>(axis)] = lo + 1;
                    v = v0 + f * (static_cast<double>(in(a[0], a[1], a[2])) - v0);
                }
                out(x, y, z) = static_cast<float>(v);
            }
    return out;
}

} // namespace detail

/// Smooth log-gain field: a grid^3 lattice of U(-A, A) values, trilinearly
/// upsampled with corners aligned to the volume corners.
inline Volume<float> sample_bias_field(const Dims& dims, int grid, double amplitude, const RngStream& rng)
{
    if (grid < 2)
        throw Error("bias control grid must have at least 2 points per axis");
    IntensityVolume lattice(Dims::cube(grid));
    Sampler s(rng);
    for (auto& v : lattice.storage())
        v = static_cast<float>(s.uniform(-amplitude, amplitude));
    IntensityVolume f = detail::resize_axis(lattice, 0, dims.nx);
    f = detail::resize_axis(f, 1, dims.ny);
    return detail::resize_axis(f, 2, dims.nz);
}

/// Multiply by exp(B) for a smooth field B bounded by the amplitude.
inline IntensityVolume apply_bias_field(const IntensityVolume& img, const AugmentationParams& params, const RngStream& rng)
{
    const Volume<float> field = sample_bias_field(img.dims(), params.bias_grid, params.bias_amplitude, rng);
    IntensityVolume out(img.dims());
    for (std::size_t i = 0; i < img.size(); ++i)
        out[i] = static_cast<float>(img[i] * std::exp(static_cast<double>(field[i])));
    return out;
}

/// Min/max normalise, raise to gamma, map back. Flat volumes pass through.
inline IntensityVolume apply_gamma(const IntensityVolume& img, double gamma)
{
    if (!(gamma > 0.0))
        throw Error("gamma must be positive");
    if (img.empty())
        return img;
    const auto [mn_it, mx_it] = std::minmax_element(img.storage().begin(), img.storage().end());
    const double mn = *mn_it, mx = *mx_it;
    if (!(mx > mn))
        return img;
    IntensityVolume out(img.dims());
    const double range = mx - mn;
    for (std::size_t i = 0; i < img.size(); ++i)
        out[i] = static_cast<float>(mn + range * std::pow((img[i] - mn) / range, gamma));
    return out;
}

/// Simulated lower acquisition resolution at unchanged dims: blur with std
/// 0.42 (factor - 1) per axis, downsample by the factor, upsample back.
inline IntensityVolume apply_resolution_degradation(const IntensityVolume& img, const Vec3& factors)
{
    for (double f : factors)
        if (!(f >= 1.0))
            throw Error("resolution factors must be >= 1");
    IntensityVolume out = img;
    gaussian_blur(out, {0.42 * (factors[0] - 1.0), 0.42 * (factors[1] - 1.0), 0.42 * (factors[2] - 1.0)}, Border::replicate);
    const Dims d = img.dims();
    for (int axis = 0; axis < 3; ++axis) {
        const int n = d[axis];
        const int m = std::max(1, static_cast<int>(std::lround(n / factors[static_cast<std::size_t>(axis)])));
        if (m == n)
            continue;
        out = detail::resize_axis(out, axis, m);
        out = detail::resize_axis(out, axis, n);
    }
    return out;
}

inline IntensityVolume apply_noise(const IntensityVolume& img, double stddev, const RngStream& rng)
{
    if (!(stddev >= 0.0))
        throw Error("noise std must be non-negative");
    if (stddev == 0.0)
        return img;
    Sampler s(rng);
    IntensityVolume out(img.dims());
    for (std::size_t i = 0; i < img.size(); ++i)
        out[i] = static_cast<float>(img[i] + s.normal(0.0, stddev));
    return out;
}

struct SynthesisOptions {
    bool normalize = true; ///< divide by 255 after clamping
};

struct SynthesisResult {
    IntensityVolume image;
    IntensityVolume preaug; ///< GMM render before augmentation and clamping
    AugmentationParams params;
};

/// Render, then bias field, gamma, resolution, noise; clamp to [0, 255] and
/// optionally rescale to [0, 1].
inline SynthesisResult synthesize_image(const LabelVolume& labels, const GmmSpec& gmm, const AugmentationRanges& ranges,
                                        const RngStream& rng, const SynthesisOptions& opts = {})
{
    SynthesisResult r;
    r.preaug = render_intensity(labels, gmm, rng.child(streams::render));
    r.params = sample_augmentation(ranges, rng.child(streams::aug_params));
    IntensityVolume img = r.preaug;
    if (r.params.bias_amplitude > 0.0)
        img = apply_bias_field(img, r.params, rng.child(streams::bias));
    if (r.params.gamma != 1.0)
        img = apply_gamma(img, r.params.gamma);
    img = apply_resolution_degradation(img, r.params.resolution);
    img = apply_noise(img, r.params.noise_std, rng.child(streams::noise));
    for (auto& v : img.storage()) {
        v = std::clamp(v, 0.0f, 255.0f);
        if (opts.normalize)
            v /= 255.0f;
    }
    r.image = std::move(img);
    return r;
}

inline void to_json(nlohmann::json& j, const GmmSpec& g)
{
    j = nlohmann::json::array();
    for (std::size_t i = 0; i < g.size(); ++i)
        j.push_back({{"label", i + 1}, {"mean", g.components[i].mean}, {"variance", g.components[i].variance}});
}

inline void from_json(const nlohmann::json& j, GmmSpec& g)
{
    g.components.clear();
    for (const auto& e : j) {
        if (e.at("label").get<std::size_t>() != g.components.size() + 1)
            throw Error("GMM components must be listed for labels 1..K+1 in order");
        g.components.push_back({e.at("mean").get<double>(), e.at("variance").get<double>()});
    }
}

inline void to_json(nlohmann::json& j, const AugmentationParams& p)
{
    j = {{"bias_grid", p.bias_grid},
         {"bias_amplitude", p.bias_amplitude},
         {"gamma", p.gamma},
         {"resolution", p.resolution},
         {"noise_std", p.noise_std}};
}

inline void from_json(const nlohmann::json& j, AugmentationParams& p)
{
    p.bias_grid = j.at("bias_grid").get<int>();
    p.bias_amplitude = j.at("bias_amplitude").get<double>();
    p.gamma = j.at("gamma").get<double>();
    p.resolution = j.at("resolution").get<Vec3>();
    p.noise_std = j.at("noise_std").get<double>();
}

} // namespace synthforge
