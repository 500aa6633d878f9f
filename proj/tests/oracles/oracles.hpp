#pragma once

// Slow, independent reference implementations used only by the tests.
// None of them call into the library code they check.

#include <zlib.h>

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace oracle {

// Reference SplitMix64 generator, written out independently of the library.
struct SplitMix64 {
    std::uint64_t state;
    std::uint64_t next()
    {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }
};

// derive_seed expressed through the generator: the first output of a
// generator whose state, once incremented, equals parent ^ id * golden.
inline std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t id)
{
    SplitMix64 g{(parent ^ (id * 0x9E3779B97F4A7C15ull)) - 0x9E3779B97F4A7C15ull};
    return g.next();
}

// Dense x-fastest binary grid.
struct Grid {
    int nx = 0, ny = 0, nz = 0;
    std::vector<std::uint8_t> v;

    Grid(int x, int y, int z) : nx(x), ny(y), nz(z), v(static_cast<std::size_t>(x) * y * z, 0) {}
    std::uint8_t get(int x, int y, int z) const
    {
        if (x < 0 || y < 0 || z < 0 || x >= nx || y >= ny || z >= nz)
            return 0;
        return v[(static_cast<std::size_t>(z) * ny + y) * nx + x];
    }
    void set(int x, int y, int z, std::uint8_t val) { v[(static_cast<std::size_t>(z) * ny + y) * nx + x] = val; }
};

// One step of 3x3x3 cube morphology: every voxel inspects its 26 neighbours.
inline Grid naive_step(const Grid& in, bool dilate)
{
    Grid out(in.nx, in.ny, in.nz);
    for (int z = 0; z < in.nz; ++z)
        for (int y = 0; y < in.ny; ++y)
            for (int x = 0; x < in.nx; ++x) {
                bool any = false, all = true;
                for (int dz = -1; dz <= 1; ++dz)
                    for (int dy = -1; dy <= 1; ++dy)
                        for (int dx = -1; dx <= 1; ++dx) {
                            const bool f = in.get(x + dx, y + dy, z + dz) != 0;
                            any = any || f;
                            all = all && f;
                        }
                out.set(x, y, z, dilate ? any : all);
            }
    return out;
}

// op: 0 erode, 1 dilate, 2 open, 3 close
inline Grid naive_morphology(Grid g, int op, int iterations)
{
    for (auto& x : g.v)
        x = x != 0;
    auto run = [&](bool dilate) {
        for (int i = 0; i < iterations; ++i)
            g = naive_step(g, dilate);
    };
    switch (op) {
    case 0: run(false); break;
    case 1: run(true); break;
    case 2: run(false); run(true); break;
    case 3: run(true); run(false); break;
    default: throw std::invalid_argument("op");
    }
    return g;
}

// Brute-force voxel-centre counts for the analytic solids, centred at c.
inline std::size_t count_ellipsoid(int n, std::array<double, 3> c, std::array<double, 3> r)
{
    std::size_t k = 0;
    for (int z = 0; z < n; ++z)
        for (int y = 0; y < n; ++y)
            for (int x = 0; x < n; ++x) {
                const double a = (x - c[0]) / r[0], b = (y - c[1]) / r[1], d = (z - c[2]) / r[2];
                k += a * a + b * b + d * d <= 1.0;
            }
    return k;
}

inline std::size_t count_cylinder(int n, std::array<double, 3> c, double r, double h)
{
    std::size_t k = 0;
    for (int z = 0; z < n; ++z)
        for (int y = 0; y < n; ++y)
            for (int x = 0; x < n; ++x) {
                const double dx = x - c[0], dy = y - c[1], dz = z - c[2];
                k += dx * dx + dy * dy <= r * r && std::abs(dz) <= h / 2;
            }
    return k;
}

// Apex at +h/2, base of radius r at -h/2.
inline std::size_t count_cone(int n, std::array<double, 3> c, double r, double h)
{
    std::size_t k = 0;
    for (int z = 0; z < n; ++z)
        for (int y = 0; y < n; ++y)
            for (int x = 0; x < n; ++x) {
                const double dx = x - c[0], dy = y - c[1], dz = z - c[2];
                if (std::abs(dz) > h / 2)
                    continue;
                const double rz = r * (h / 2 - dz) / h;
                k += std::sqrt(dx * dx + dy * dy) <= rz;
            }
    return k;
}

// Minimal NIfTI-1 reader: byte-by-byte little-endian decoding of the fields
// the tests care about.
struct NiftiFile {
    std::int32_t sizeof_hdr = 0;
    std::array<std::int16_t, 8> dim{};
    std::int16_t datatype = 0;
    std::int16_t bitpix = 0;
    float vox_offset = 0;
    float scl_slope = 0;
    float scl_inter = 0;
    std::int16_t sform_code = 0;
    std::array<float, 12> srow{};
    std::string magic;
    std::vector<std::uint8_t> bytes; // whole file, decompressed
    std::vector<std::uint8_t> data;  // voxel payload
};

inline std::vector<std::uint8_t> slurp(const std::filesystem::path& p)
{
    gzFile f = gzopen(p.string().c_str(), "rb");
    if (!f)
        throw std::runtime_error("cannot open " + p.string());
    std::vector<std::uint8_t> out;
    std::uint8_t buf[65536];
    int n;
    while ((n = gzread(f, buf, sizeof(buf))) > 0)
        out.insert(out.end(), buf, buf + n);
    gzclose(f);
    if (n < 0)
        throw std::runtime_error("read error " + p.string());
    return out;
}

inline std::uint32_t le32(const std::vector<std::uint8_t>& b, std::size_t o)
{
    return std::uint32_t(b[o]) | std::uint32_t(b[o + 1]) << 8 | std::uint32_t(b[o + 2]) << 16 | std::uint32_t(b[o + 3]) << 24;
}
inline std::int16_t le16(const std::vector<std::uint8_t>& b, std::size_t o)
{
    return static_cast<std::int16_t>(std::uint16_t(b[o]) | std::uint16_t(b[o + 1]) << 8);
}
inline float lef32(const std::vector<std::uint8_t>& b, std::size_t o)
{
    const std::uint32_t u = le32(b, o);
    float f;
    static_assert(sizeof f == sizeof u);
    __builtin_memcpy(&f, &u, 4);
    return f;
}

inline NiftiFile read_nifti(const std::filesystem::path& p)
{
    NiftiFile n;
    n.bytes = slurp(p);
    const auto& b = n.bytes;
    if (b.size() < 352)
        throw std::runtime_error("short file");
    n.sizeof_hdr = static_cast<std::int32_t>(le32(b, 0));
    for (int i = 0; i < 8; ++i)
        n.dim[i] = le16(b, 40 + 2 * i);
    n.datatype = le16(b, 70);
    n.bitpix = le16(b, 72);
    n.vox_offset = lef32(b, 108);
    n.scl_slope = lef32(b, 112);
    n.scl_inter = lef32(b, 116);
    n.sform_code = le16(b, 254);
    for (int i = 0; i < 12; ++i)
        n.srow[i] = lef32(b, 280 + 4 * i);
    n.magic.assign(reinterpret_cast<const char*>(&b[344]), 4);
    const auto off = static_cast<std::size_t>(n.vox_offset);
    n.data.assign(b.begin() + static_cast<std::ptrdiff_t>(off), b.end());
    return n;
}

} // namespace oracle
