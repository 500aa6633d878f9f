#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <type_traits>
#include <vector>

#include <zlib.h>

#include "synthforge/core/error.hpp"
#include "synthforge/core/volume.hpp"

namespace synthforge::io {

namespace fs = std::filesystem;

static_assert(std::endian::native == std::endian::little, "NIfTI I/O assumes a little-endian host");

/// NIfTI-1 datatype codes.
namespace nifti_type {
inline constexpr std::int16_t uint8 = 2;
inline constexpr std::int16_t int16 = 4;
inline constexpr std::int16_t int32 = 8;
inline constexpr std::int16_t float32 = 16;
inline constexpr std::int16_t float64 = 64;
inline constexpr std::int16_t int8 = 256;
inline constexpr std::int16_t uint16 = 512;
inline constexpr std::int16_t uint32 = 768;
} // namespace nifti_type

inline constexpr std::size_t nifti_header_size = 348;
inline constexpr std::size_t nifti_data_offset = 352;

inline bool has_gz_suffix(const fs::path& p) { return p.extension() == ".gz"; }

namespace detail {

template <typename V>
void put(std::vector<std::uint8_t>& buf, std::size_t off, V v)
{
    std::memcpy(buf.data() + off, &v, sizeof(V));
}

template <typename V>
V get(const std::vector<std::uint8_t>& buf, std::size_t off)
{
    V v;
    std::memcpy(&v, buf.data() + off, sizeof(V));
    return v;
}

inline std::vector<std::uint8_t> read_all(const fs::path& path)
{
    gzFile f = gzopen(path.string().c_str(), "rb");
    if (!f)
        throw IoError("cannot open " + path.string());
    std::vector<std::uint8_t> out;
    std::vector<std::uint8_t> chunk(1 << 20);
    for (;;) {
        const int n = gzread(f, chunk.data(), static_cast<unsigned>(chunk.size()));
        if (n < 0) {
            gzclose(f);
            throw IoError("read error in " + path.string());
        }
        if (n == 0)
            break;
        out.insert(out.end(), chunk.begin(), chunk.begin() + n);
    }
    gzclose(f);
    return out;
}

inline void write_all(const fs::path& path, const std::vector<std::uint8_t>& bytes, bool gzip)
{
    if (gzip) {
        gzFile f = gzopen(path.string().c_str(), "wb6");
        if (!f)
            throw IoError("cannot create " + path.string());
        std::size_t done = 0;
        while (done < bytes.size()) {
            const auto n = static_cast<unsigned>(std::min<std::size_t>(bytes.size() - done, 1u << 24));
            if (gzwrite(f, bytes.data() + done, n) != static_cast<int>(n)) {
                gzclose(f);
                throw IoError("write error in " + path.string());
            }
            done += n;
        }
        if (gzclose(f) != Z_OK)
            throw IoError("write error in " + path.string());
        return;
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot create " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw IoError("write error in " + path.string());
}

template <typename T>
constexpr std::int16_t nifti_datatype_for()
{
    if constexpr (std::is_same_v<T, std::uint16_t>)
        return nifti_type::uint16;
    else if constexpr (std::is_same_v<T, float>)
        return nifti_type::float32;
    else
        return 0;
}

inline int bytes_per_voxel(std::int16_t datatype)
{
    switch (datatype) {
    case nifti_type::uint8:
    case nifti_type::int8: return 1;
    case nifti_type::int16:
    case nifti_type::uint16: return 2;
    case nifti_type::int32:
    case nifti_type::uint32:
    case nifti_type::float32: return 4;
    case nifti_type::float64: return 8;
    default: return 0;
    }
}

inline double decode_voxel(const std::uint8_t* p, std::int16_t datatype)
{
    switch (datatype) {
    case nifti_type::uint8: return *p;
    case nifti_type::int8: return static_cast<std::int8_t>(*p);
    case nifti_type::int16: { std::int16_t v; std::memcpy(&v, p, 2); return v; }
    case nifti_type::uint16: { std::uint16_t v; std::memcpy(&v, p, 2); return v; }
    case nifti_type::int32: { std::int32_t v; std::memcpy(&v, p, 4); return v; }
    case nifti_type::uint32: { std::uint32_t v; std::memcpy(&v, p, 4); return v; }
    case nifti_type::float32: { float v; std::memcpy(&v, p, 4); return v; }
    case nifti_type::float64: { double v; std::memcpy(&v, p, 8); return v; }
    default: return 0.0;
    }
}

} // namespace detail

/// Header fields the reader cares about.
struct NiftiInfo {
    Dims dims;
    std::int16_t datatype = 0;
    std::int16_t bitpix = 0;
    float vox_offset = 0.0f;
    float scl_slope = 0.0f;
    float scl_inter = 0.0f;
};

/// Single-file NIfTI-1 ("n+1"), 3D, little-endian, identity sform. Labels
/// are stored as uint16 (512) and intensities as float32 (16). A ".gz"
/// suffix selects gzip.
template <typename T>
void write_nifti(const Volume<T>& vol, const fs::path& path)
{
    constexpr std::int16_t datatype = detail::nifti_datatype_for<T>();
    if constexpr (datatype == 0) {
        throw IoError("unsupported element kind for NIfTI output: " + path.string());
    } else {
        const Dims d = vol.dims();
        if (d.nx > 32767 || d.ny > 32767 || d.nz > 32767)
            throw IoError("volume too large for NIfTI-1 dims: " + to_string(d));
        std::vector<std::uint8_t> buf(nifti_data_offset + vol.size() * sizeof(T), 0);
        using detail::put;
        put<std::int32_t>(buf, 0, static_cast<std::int32_t>(nifti_header_size));
        buf[38] = 'r';
        const std::int16_t dim[8] = {3, static_cast<std::int16_t>(d.nx), static_cast<std::int16_t>(d.ny),
                                     static_cast<std::int16_t>(d.nz), 1, 1, 1, 1};
        for (int i = 0; i < 8; ++i)
            put<std::int16_t>(buf, 40 + 2 * i, dim[i]);
        put<std::int16_t>(buf, 70, datatype);
        put<std::int16_t>(buf, 72, static_cast<std::int16_t>(8 * sizeof(T)));
        const float pixdim[8] = {1, 1, 1, 1, 1, 1, 1, 1};
        for (int i = 0; i < 8; ++i)
            put<float>(buf, 76 + 4 * i, pixdim[i]);
        put<float>(buf, 108, static_cast<float>(nifti_data_offset));
        put<float>(buf, 112, 1.0f); // scl_slope
        put<float>(buf, 116, 0.0f); // scl_inter
        buf[123] = 2;               // xyzt_units: mm
        const char descrip[] = "synthforge";
        std::memcpy(buf.data() + 148, descrip, sizeof(descrip) - 1);
        put<std::int16_t>(buf, 252, 0); // qform_code
        put<std::int16_t>(buf, 254, 1); // sform_code: scanner
        const float srow[3][4] = {{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}};
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 4; ++c)
                put<float>(buf, 280 + 16 * r + 4 * c, srow[r][c]);
        std::memcpy(buf.data() + 344, "n+1\0", 4);
        std::memcpy(buf.data() + nifti_data_offset, vol.storage().data(), vol.size() * sizeof(T));
        detail::write_all(path, buf, has_gz_suffix(path));
    }
}

inline NiftiInfo parse_nifti_header(const std::vector<std::uint8_t>& bytes, const fs::path& path)
{
    using detail::get;
    if (bytes.size() < nifti_header_size)
        throw IoError("truncated NIfTI header in " + path.string());
    if (get<std::int32_t>(bytes, 0) != static_cast<std::int32_t>(nifti_header_size))
        throw IoError("not a little-endian NIfTI-1 file: " + path.string());
    if (std::memcmp(bytes.data() + 344, "n+1\0", 4) != 0)
        throw IoError("unsupported NIfTI magic (expected single-file n+1): " + path.string());
    NiftiInfo info;
    const auto ndim = get<std::int16_t>(bytes, 40);
    if (ndim < 1 || ndim > 7)
        throw IoError("invalid dim[0] in " + path.string());
    std::int16_t dim[8];
    for (int i = 0; i < 8; ++i)
        dim[i] = get<std::int16_t>(bytes, 40 + 2 * i);
    for (int i = 4; i <= ndim; ++i)
        if (dim[i] > 1)
            throw IoError("only 3D NIfTI volumes are supported: " + path.string());
    info.dims = {dim[1], ndim >= 2 ? dim[2] : std::int16_t{1}, ndim >= 3 ? dim[3] : std::int16_t{1}};
    if (!info.dims.valid())
        throw IoError("non-positive NIfTI dims in " + path.string());
    info.datatype = get<std::int16_t>(bytes, 70);
    info.bitpix = get<std::int16_t>(bytes, 72);
    info.vox_offset = get<float>(bytes, 108);
    info.scl_slope = get<float>(bytes, 112);
    info.scl_inter = get<float>(bytes, 116);
    if (detail::bytes_per_voxel(info.datatype) == 0)
        throw IoError("unsupported NIfTI datatype " + std::to_string(info.datatype) + " in " + path.string());
    return info;
}

inline NiftiInfo read_nifti_info(const fs::path& path)
{
    return parse_nifti_header(detail::read_all(path), path);
}

/// Read a 3D NIfTI-1 volume, converting the stored datatype to T. Label
/// volumes must hold integers in [0, 65535].
template <typename T>
Volume<T> read_nifti(const fs::path& path)
{
    const auto bytes = detail::read_all(path);
    const NiftiInfo info = parse_nifti_header(bytes, path);
    const auto bpv = static_cast<std::size_t>(detail::bytes_per_voxel(info.datatype));
    const auto offset = static_cast<std::size_t>(info.vox_offset);
    if (offset < nifti_header_size || bytes.size() < offset + info.dims.count() * bpv)
        throw IoError("truncated NIfTI data in " + path.string());

    Volume<T> vol(info.dims);
    constexpr std::int16_t native = detail::nifti_datatype_for<T>();
    const bool scaled = info.scl_slope != 0.0f && !(info.scl_slope == 1.0f && info.scl_inter == 0.0f);
    if (native != 0 && info.datatype == native && !scaled) {
        std::memcpy(vol.storage().data(), bytes.data() + offset, vol.size() * sizeof(T));
        return vol;
    }
    for (std::size_t i = 0; i < vol.size(); ++i) {
        double v = detail::decode_voxel(bytes.data() + offset + i * bpv, info.datatype);
        if (scaled)
            v = v * info.scl_slope + info.scl_inter;
        if constexpr (is_label_kind_v<T>) {
            if (!(v >= 0.0 && v <= static_cast<double>(std::numeric_limits<T>::max())) || v != std::floor(v))
                throw IoError("label volume holds a non-integer or out-of-range value in " + path.string());
        }
        vol[i] = static_cast<T>(v);
    }
    return vol;
}

} // namespace synthforge::io
