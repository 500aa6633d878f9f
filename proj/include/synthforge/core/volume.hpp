#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "synthforge/core/error.hpp"

namespace synthforge {

/// Grid extent in voxels.
struct Dims {
    int nx = 0;
    int ny = 0;
    int nz = 0;

    [[nodiscard]] constexpr std::size_t count() const noexcept
    {
        return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) *
               static_cast<std::size_t>(nz);
    }
    [[nodiscard]] constexpr bool valid() const noexcept { return nx > 0 && ny > 0 && nz > 0; }
    [[nodiscard]] constexpr int operator[](int axis) const noexcept
    {
        return axis == 0 ? nx : (axis == 1 ? ny : nz);
    }
    [[nodiscard]] constexpr bool contains(int x, int y, int z) const noexcept
    {
        return x >= 0 && y >= 0 && z >= 0 && x < nx && y < ny && z < nz;
    }
    static constexpr Dims cube(int n) noexcept { return {n, n, n}; }

    friend constexpr bool operator==(const Dims&, const Dims&) = default;
};

inline std::string to_string(const Dims& d)
{
    return std::to_string(d.nx) + "x" + std::to_string(d.ny) + "x" + std::to_string(d.nz);
}

using Index3 = std::array<int, 3>;
using Vec3 = std::array<double, 3>;

/// Dense 3D grid stored x-fastest: index = x + nx * (y + ny * z).
template <typename T>
class Volume {
public:
    using value_type = T;

    Volume() = default;
    explicit Volume(Dims dims, T fill = T{}) : dims_(dims), data_(checked_count(dims), fill) {}
    Volume(Dims dims, std::vector<T> data) : dims_(dims), data_(std::move(data))
    {
        if (data_.size() != checked_count(dims))
            throw Error("volume data length " + std::to_string(data_.size()) +
                        " does not match dims " + to_string(dims));
    }

    [[nodiscard]] const Dims& dims() const noexcept { return dims_; }
    [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
    [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

    [[nodiscard]] std::size_t index(int x, int y, int z) const noexcept
    {
        return static_cast<std::size_t>(x) +
               static_cast<std::size_t>(dims_.nx) *
                   (static_cast<std::size_t>(y) + static_cast<std::size_t>(dims_.ny) * static_cast<std::size_t>(z));
    }
    [[nodiscard]] Index3 coords(std::size_t i) const noexcept
    {
        const auto nx = static_cast<std::size_t>(dims_.nx);
        const auto ny = static_cast<std::size_t>(dims_.ny);
        return {static_cast<int>(i % nx), static_cast<int>((i / nx) % ny), static_cast<int>(i / (nx * ny))};
    }

    T& operator()(int x, int y, int z) noexcept { return data_[index(x, y, z)]; }
    const T& operator()(int x, int y, int z) const noexcept { return data_[index(x, y, z)]; }
    T& operator[](std::size_t i) noexcept { return data_[i]; }
    const T& operator[](std::size_t i) const noexcept { return data_[i]; }

    /// Value at (x, y, z) or `outside` when the coordinate is off-grid.
    [[nodiscard]] T at_or(int x, int y, int z, T outside = T{}) const noexcept
    {
        return dims_.contains(x, y, z) ? data_[index(x, y, z)] : outside;
    }

    [[nodiscard]] std::span<T> data() noexcept { return data_; }
    [[nodiscard]] std::span<const T> data() const noexcept { return data_; }
    [[nodiscard]] std::vector<T>& storage() noexcept { return data_; }
    [[nodiscard]] const std::vector<T>& storage() const noexcept { return data_; }

    void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

    friend bool operator==(const Volume&, const Volume&) = default;

private:
    static std::size_t checked_count(Dims d)
    {
        if (!d.valid())
            throw Error("volume dims must be positive, got " + to_string(d));
        return d.count();
    }

    Dims dims_{};
    std::vector<T> data_;
};

/// Label ids: 0 background, 1 container, rule j maps to j + 2.
using Label = std::uint16_t;
using LabelVolume = Volume<Label>;
using IntensityVolume = Volume<float>;
/// 0 / 1 mask.
using BinaryVolume = Volume<std::uint8_t>;

template <typename T>
inline constexpr bool is_label_kind_v = std::is_integral_v<T>;

/// Inclusive voxel bounding box.
struct BBox {
    Index3 lo{0, 0, 0};
    Index3 hi{-1, -1, -1};

    [[nodiscard]] bool empty() const noexcept { return hi[0] < lo[0] || hi[1] < lo[1] || hi[2] < lo[2]; }
    [[nodiscard]] Dims extent() const noexcept
    {
        return {hi[0] - lo[0] + 1, hi[1] - lo[1] + 1, hi[2] - lo[2] + 1};
    }
    friend bool operator==(const BBox&, const BBox&) = default;
};

template <typename T, typename Pred>
BBox bounding_box_if(const Volume<T>& vol, Pred pred)
{
    BBox box{{vol.dims().nx, vol.dims().ny, vol.dims().nz}, {-1, -1, -1}};
    const Dims d = vol.dims();
    for (int z = 0; z < d.nz; ++z)
        for (int y = 0; y < d.ny; ++y)
            for (int x = 0; x < d.nx; ++x) {
                if (!pred(vol(x, y, z)))
                    continue;
                box.lo = {std::min(box.lo[0], x), std::min(box.lo[1], y), std::min(box.lo[2], z)};
                box.hi = {std::max(box.hi[0], x), std::max(box.hi[1], y), std::max(box.hi[2], z)};
            }
    if (box.empty())
        return BBox{};
    return box;
}

/// Bounding box of nonzero voxels; empty box when the volume is all zero.
template <typename T>
BBox bounding_box(const Volume<T>& vol)
{
    return bounding_box_if(vol, [](T v) { return v != T{}; });
}

template <typename T>
Volume<T> crop(const Volume<T>& vol, const BBox& box)
{
    if (box.empty())
        throw Error("cannot crop to an empty bounding box");
    Volume<T> out(box.extent());
    const Dims e = box.extent();
    for (int z = 0; z < e.nz; ++z)
        for (int y = 0; y < e.ny; ++y)
            for (int x = 0; x < e.nx; ++x)
                out(x, y, z) = vol.at_or(x + box.lo[0], y + box.lo[1], z + box.lo[2]);
    return out;
}

template <typename T>
std::size_t count_nonzero(const Volume<T>& vol)
{
    return static_cast<std::size_t>(
        std::count_if(vol.storage().begin(), vol.storage().end(), [](T v) { return v != T{}; }));
}

template <typename T>
double foreground_fraction(const Volume<T>& vol)
{
    return vol.empty() ? 0.0 : static_cast<double>(count_nonzero(vol)) / static_cast<double>(vol.size());
}

/// Grid-center coordinate in voxel units, (n - 1) / 2 per axis.
inline Vec3 grid_center(const Dims& d)
{
    return {(d.nx - 1) * 0.5, (d.ny - 1) * 0.5, (d.nz - 1) * 0.5};
}

} // namespace synthforge
