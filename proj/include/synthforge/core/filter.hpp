#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "synthforge/core/volume.hpp"

namespace synthforge {

enum class Border { zero, replicate };

/// Normalized Gaussian taps, truncated at ceil(3 sigma). sigma <= 0 gives the
/// single tap {1}.
inline std::vector<double> gaussian_kernel(double sigma)
{
    if (!(sigma > 0.0))
        return {1.0};
    const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> k(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        k[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
        sum += k[i + radius];
    }
    for (double& v : k)
        v /= sum;
    return k;
}

/// Convolve every line along `axis` with a symmetric odd-length kernel.
template <typename T>
void convolve_axis(Volume<T>& vol, int axis, const std::vector<double>& kernel, Border border)
{
    if (kernel.size() <= 1)
        return;
    const Dims d = vol.dims();
    const int n = d[axis];
    const int radius = static_cast<int>(kernel.size() / 2);
    const std::size_t stride = axis == 0 ? 1 : (axis == 1 ? static_cast<std::size_t>(d.nx) : static_cast<std::size_t>(d.nx) * d.ny);
    const int n1 = axis == 0 ? d.ny : d.nx;
    const int n2 = axis == 2 ? d.ny : d.nz;

    std::vector<double> line(static_cast<std::size_t>(n + 2 * radius));
    auto& data = vol.storage();
    for (int b = 0; b < n2; ++b)
        for (int a = 0; a < n1; ++a) {
            std::size_t base = 0;
            if (axis == 0)
                base = vol.index(0, a, b);
            else if (axis == 1)
                base = vol.index(a, 0, b);
            else
                base = vol.index(a, b, 0);
            for (int i = 0; i < n; ++i)
                line[i + radius] = static_cast<double>(data[base + i * stride]);
            for (int i = 0; i < radius; ++i) {
                line[i] = border == Border::zero ? 0.0 : line[radius];
                line[n + radius + i] = border == Border::zero ? 0.0 : line[n + radius - 1];
            }
            for (int i = 0; i < n; ++i) {
                double acc = 0.0;
                const double* src = line.data() + i;
                for (std::size_t k = 0; k < kernel.size(); ++k)
                    acc += kernel[k] * src[k];
                data[base + i * stride] = static_cast<T>(acc);
            }
        }
}

/// Separable Gaussian blur with per-axis standard deviation (voxels).
template <typename T>
void gaussian_blur(Volume<T>& vol, const Vec3& sigma, Border border)
{
    for (int axis = 0; axis < 3; ++axis)
        convolve_axis(vol, axis, gaussian_kernel(sigma[axis]), border);
}

} // namespace synthforge
