#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "synthforge/core/error.hpp"
#include "synthforge/core/volume.hpp"

namespace synthforge {

enum class MorphOp { erode, dilate, open, close };

inline std::string_view to_string(MorphOp op)
{
    switch (op) {
    case MorphOp::erode: return "erode";
    case MorphOp::dilate: return "dilate";
    case MorphOp::open: return "open";
    case MorphOp::close: return "close";
    }
    return "?";
}

inline MorphOp morph_op_from_string(std::string_view s)
{
    if (s == "erode") return MorphOp::erode;
    if (s == "dilate") return MorphOp::dilate;
    if (s == "open") return MorphOp::open;
    if (s == "close") return MorphOp::close;
    throw Error("unknown morphological operation '" + std::string(s) + "'");
}

namespace detail {

// 3-wide running max (dilate) or min (erode) along one axis; off-grid
// neighbours are background. Applying it on x, y and z gives the 3x3x3 cube.
inline void cube_pass(BinaryVolume& vol, int axis, bool dilate)
{
    const Dims d = vol.dims();
    const int n = d[axis];
    if (n <= 0)
        return;
    const std::size_t stride = axis == 0 ? 1 : (axis == 1 ? static_cast<std::size_t>(d.nx) : static_cast<std::size_t>(d.nx) * d.ny);
    const int n1 = axis == 0 ? d.ny : d.nx;
    const int n2 = axis == 2 ? d.ny : d.nz;
    std::vector<std::uint8_t> line(static_cast<std::size_t>(n) + 2);
    auto& data = vol.storage();
    for (int b = 0; b < n2; ++b)
        for (int a = 0; a < n1; ++a) {
            const std::size_t base = axis == 0 ? vol.index(0, a, b) : (axis == 1 ? vol.index(a, 0, b) : vol.index(a, b, 0));
            line[0] = 0;
            line[static_cast<std::size_t>(n) + 1] = 0;
            for (int i = 0; i < n; ++i)
                line[i + 1] = data[base + i * stride] != 0;
            for (int i = 0; i < n; ++i) {
                const std::uint8_t l = line[i], c = line[i + 1], r = line[i + 2];
                data[base + i * stride] = dilate ? (l | c | r) : (l & c & r);
            }
        }
}

inline void cube_step(BinaryVolume& vol, bool dilate)
{
    for (int axis = 0; axis < 3; ++axis)
        cube_pass(vol, axis, dilate);
}

} // namespace detail

/// Binary morphology with the full 3x3x3 cube (26-connectivity). Any nonzero
/// voxel counts as foreground; the result is 0 / 1. The grid border is
/// treated as background.
inline BinaryVolume morphology(const BinaryVolume& vol, MorphOp op, int iterations)
{
    if (iterations < 1 || iterations > 3)
        throw Error("morphology iterations must be in [1, 3], got " + std::to_string(iterations));
    BinaryVolume out = vol;
    for (auto& v : out.storage())
        v = v != 0;
    const auto run = [&](bool dilate) {
        for (int i = 0; i < iterations; ++i)
            detail::cube_step(out, dilate);
    };
    switch (op) {
    case MorphOp::erode: run(false); break;
    case MorphOp::dilate: run(true); break;
    case MorphOp::open: run(false); run(true); break;
    case MorphOp::close: run(true); run(false); break;
    }
    return out;
}

} // namespace synthforge
