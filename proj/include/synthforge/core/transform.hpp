#pragma once

#include <array>
#include <cmath>
#include <string>

#include "synthforge/core/error.hpp"
#include "synthforge/core/volume.hpp"

namespace synthforge {

enum class Interpolation { nearest, trilinear };

/// General 3D affine map p -> linear * p + offset.
struct AffineMatrix {
    std::array<std::array<double, 3>, 3> linear{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
    Vec3 offset{0, 0, 0};

    static AffineMatrix identity() { return {}; }

    [[nodiscard]] Vec3 apply(const Vec3& p) const noexcept
    {
        Vec3 r{};
        for (int i = 0; i < 3; ++i)
            r[i] = linear[i][0] * p[0] + linear[i][1] * p[1] + linear[i][2] * p[2] + offset[i];
        return r;
    }

    /// (*this) after `inner`: p -> this(inner(p)).
    [[nodiscard]] AffineMatrix compose(const AffineMatrix& inner) const noexcept
    {
        AffineMatrix r;
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j)
                r.linear[i][j] = linear[i][0] * inner.linear[0][j] + linear[i][1] * inner.linear[1][j] +
                                 linear[i][2] * inner.linear[2][j];
            r.offset[i] = linear[i][0] * inner.offset[0] + linear[i][1] * inner.offset[1] +
                          linear[i][2] * inner.offset[2] + offset[i];
        }
        return r;
    }

    [[nodiscard]] AffineMatrix inverse() const
    {
        const auto& a = linear;
        const double det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
                           a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
                           a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
        if (det == 0.0 || !std::isfinite(det))
            throw Error("affine matrix is singular");
        AffineMatrix r;
        r.linear[0][0] = (a[1][1] * a[2][2] - a[1][2] * a[2][1]) / det;
        r.linear[0][1] = (a[0][2] * a[2][1] - a[0][1] * a[2][2]) / det;
        r.linear[0][2] = (a[0][1] * a[1][2] - a[0][2] * a[1][1]) / det;
        r.linear[1][0] = (a[1][2] * a[2][0] - a[1][0] * a[2][2]) / det;
        r.linear[1][1] = (a[0][0] * a[2][2] - a[0][2] * a[2][0]) / det;
        r.linear[1][2] = (a[0][2] * a[1][0] - a[0][0] * a[1][2]) / det;
        r.linear[2][0] = (a[1][0] * a[2][1] - a[1][1] * a[2][0]) / det;
        r.linear[2][1] = (a[0][1] * a[2][0] - a[0][0] * a[2][1]) / det;
        r.linear[2][2] = (a[0][0] * a[1][1] - a[0][1] * a[1][0]) / det;
        for (int i = 0; i < 3; ++i)
            r.offset[i] = -(r.linear[i][0] * offset[0] + r.linear[i][1] * offset[1] + r.linear[i][2] * offset[2]);
        return r;
    }
};

/// Rotation (Euler angles about x, y, z, applied in that order), per-axis
/// scale and translation. Rotation and scale pivot on `center`:
///   p' = Rz Ry Rx S (p - center) + center + translation
struct AffineTransform {
    Vec3 rotation{0, 0, 0};
    Vec3 scale{1, 1, 1};
    Vec3 translation{0, 0, 0};
    Vec3 center{0, 0, 0};

    static AffineTransform identity() { return {}; }

    void validate() const
    {
        for (double s : scale)
            if (!(s > 0.0) || !std::isfinite(s))
                throw Error("affine scale factors must be strictly positive");
    }

    [[nodiscard]] std::array<std::array<double, 3>, 3> rotation_matrix() const noexcept
    {
        const double cx = std::cos(rotation[0]), sx = std::sin(rotation[0]);
        const double cy = std::cos(rotation[1]), sy = std::sin(rotation[1]);
        const double cz = std::cos(rotation[2]), sz = std::sin(rotation[2]);
        // Rz * Ry * Rx
        return {{{cz * cy, cz * sy * sx - sz * cx, cz * sy * cx + sz * sx},
                 {sz * cy, sz * sy * sx + cz * cx, sz * sy * cx - cz * sx},
                 {-sy, cy * sx, cy * cx}}};
    }

    /// Forward map as a matrix.
    [[nodiscard]] AffineMatrix matrix() const
    {
        validate();
        const auto r = rotation_matrix();
        AffineMatrix m;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                m.linear[i][j] = r[i][j] * scale[j];
        for (int i = 0; i < 3; ++i)
            m.offset[i] = center[i] + translation[i] -
                          (m.linear[i][0] * center[0] + m.linear[i][1] * center[1] + m.linear[i][2] * center[2]);
        return m;
    }

    /// Inverse map built from the factors directly: S^-1 R^T (p - c - t) + c.
    /// Exact for the identity transform.
    [[nodiscard]] AffineMatrix inverse_matrix() const
    {
        validate();
        const auto r = rotation_matrix();
        AffineMatrix m;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                m.linear[i][j] = r[j][i] / scale[i];
        const Vec3 shift{center[0] + translation[0], center[1] + translation[1], center[2] + translation[2]};
        for (int i = 0; i < 3; ++i)
            m.offset[i] = center[i] -
                          (m.linear[i][0] * shift[0] + m.linear[i][1] * shift[1] + m.linear[i][2] * shift[2]);
        return m;
    }
};

namespace detail {

inline int round_to_int(double v) noexcept { return static_cast<int>(std::floor(v + 0.5)); }

template <typename T>
T sample_nearest(const Volume<T>& vol, const Vec3& p) noexcept
{
    const double lim = 1e9;
    if (!(std::abs(p[0]) < lim && std::abs(p[1]) < lim && std::abs(p[2]) < lim))
        return T{};
    return vol.at_or(round_to_int(p[0]), round_to_int(p[1]), round_to_int(p[2]));
}

/// Trilinear sample; neighbours off the grid contribute zero.
template <typename T>
double sample_trilinear(const Volume<T>& vol, const Vec3& p) noexcept
{
    const Dims& d = vol.dims();
    if (!(p[0] > -1.0 && p[1] > -1.0 && p[2] > -1.0 && p[0] < d.nx && p[1] < d.ny && p[2] < d.nz))
        return 0.0;
    const int x0 = static_cast<int>(std::floor(p[0]));
    const int y0 = static_cast<int>(std::floor(p[1]));
    const int z0 = static_cast<int>(std::floor(p[2]));
    const double fx = p[0] - x0, fy = p[1] - y0, fz = p[2] - z0;
    double acc = 0.0;
    for (int dz = 0; dz < 2; ++dz) {
        const double wz = dz ? fz : 1.0 - fz;
        if (wz == 0.0)
            continue;
        for (int dy = 0; dy < 2; ++dy) {
            const double wy = dy ? fy : 1.0 - fy;
            if (wy == 0.0)
                continue;
            for (int dx = 0; dx < 2; ++dx) {
                const double wx = dx ? fx : 1.0 - fx;
                if (wx == 0.0)
                    continue;
                acc += wx * wy * wz * static_cast<double>(vol.at_or(x0 + dx, y0 + dy, z0 + dz));
            }
        }
    }
    return acc;
}

} // namespace detail

/// Inverse-mapping resample onto a grid of `out_dims`: output voxel v takes
/// the input value at `out_to_in(v)`. Off-grid samples are 0.
template <typename T>
Volume<T> resample_affine(const Volume<T>& vol, const AffineMatrix& out_to_in, Dims out_dims, Interpolation interp)
{
    if (is_label_kind_v<T> && interp == Interpolation::trilinear)
        throw Error("trilinear interpolation is not allowed on label volumes");
    Volume<T> out(out_dims);
    for (int z = 0; z < out_dims.nz; ++z)
        for (int y = 0; y < out_dims.ny; ++y)
            for (int x = 0; x < out_dims.nx; ++x) {
                const Vec3 p = out_to_in.apply({static_cast<double>(x), static_cast<double>(y), static_cast<double>(z)});
                if (interp == Interpolation::nearest)
                    out(x, y, z) = detail::sample_nearest(vol, p);
                else
                    out(x, y, z) = static_cast<T>(detail::sample_trilinear(vol, p));
            }
    return out;
}

/// Resample `vol` under `xf` on its own grid.
template <typename T>
Volume<T> apply_affine(const Volume<T>& vol, const AffineTransform& xf, Interpolation interp)
{
    return resample_affine(vol, xf.inverse_matrix(), vol.dims(), interp);
}

} // namespace synthforge
