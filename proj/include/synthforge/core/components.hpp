#pragma once

#include <cstdint>
#include <vector>

#include "synthforge/core/volume.hpp"

namespace synthforge {

/// Keep only the largest 6-connected foreground component. Ties go to the
/// component found first in x-fastest scan order.
inline BinaryVolume largest_component(const BinaryVolume& vol)
{
    const Dims d = vol.dims();
    std::vector<std::int32_t> label(vol.size(), 0);
    std::vector<std::size_t> stack;
    std::int32_t next = 0, best = 0;
    std::size_t best_size = 0;
    static constexpr int offs[6][3] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};

    for (std::size_t seed = 0; seed < vol.size(); ++seed) {
        if (vol[seed] == 0 || label[seed] != 0)
            continue;
        ++next;
        std::size_t size = 0;
        label[seed] = next;
        stack.push_back(seed);
        while (!stack.empty()) {
            const std::size_t i = stack.back();
            stack.pop_back();
            ++size;
            const Index3 c = vol.coords(i);
            for (const auto& o : offs) {
                const int x = c[0] + o[0], y = c[1] + o[1], z = c[2] + o[2];
                if (!d.contains(x, y, z))
                    continue;
                const std::size_t j = vol.index(x, y, z);
                if (vol[j] != 0 && label[j] == 0) {
                    label[j] = next;
                    stack.push_back(j);
                }
            }
        }
        if (size > best_size) {
            best_size = size;
            best = next;
        }
    }
    BinaryVolume out(d);
    for (std::size_t i = 0; i < vol.size(); ++i)
        out[i] = (best != 0 && label[i] == best) ? 1 : 0;
    return out;
}

/// Number of 6-connected foreground components.
inline int count_components(const BinaryVolume& vol)
{
    BinaryVolume rest = vol;
    int n = 0;
    while (count_nonzero(rest) > 0) {
        const BinaryVolume big = largest_component(rest);
        for (std::size_t i = 0; i < rest.size(); ++i)
            if (big[i])
                rest[i] = 0;
        ++n;
    }
    return n;
}

} // namespace synthforge
