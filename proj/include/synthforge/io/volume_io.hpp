#pragma once

#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <string_view>

#include "synthforge/core/digest.hpp"
#include "synthforge/core/error.hpp"
#include "synthforge/core/volume.hpp"
#include "synthforge/io/nifti.hpp"
#include "synthforge/io/raw.hpp"

namespace synthforge::io {

enum class VolumeFormat { nifti, raw };

inline std::string_view to_string(VolumeFormat f) { return f == VolumeFormat::nifti ? "nifti" : "raw"; }

inline VolumeFormat volume_format_from_string(std::string_view s)
{
    if (s == "nifti") return VolumeFormat::nifti;
    if (s == "raw") return VolumeFormat::raw;
    throw ConfigError("unknown volume format '" + std::string(s) + "' (expected nifti or raw)");
}

/// ".raw" selects the raw format, anything else is read as NIfTI-1.
inline VolumeFormat format_from_path(const fs::path& p)
{
    return p.extension() == ".raw" ? VolumeFormat::raw : VolumeFormat::nifti;
}

/// File name suffix for a format; NIfTI output is gzipped when `gzip`.
inline std::string volume_suffix(VolumeFormat f, bool gzip)
{
    if (f == VolumeFormat::raw)
        return ".raw";
    return gzip ? ".nii.gz" : ".nii";
}

template <typename T>
void write_volume(const Volume<T>& vol, const fs::path& path, VolumeFormat format)
{
    if (format == VolumeFormat::nifti)
        write_nifti(vol, path);
    else
        write_raw(vol, path);
}

template <typename T>
Volume<T> read_volume(const fs::path& path)
{
    if (!fs::exists(path))
        throw IoError("no such file: " + path.string());
    return format_from_path(path) == VolumeFormat::raw ? read_raw<T>(path) : read_nifti<T>(path);
}

/// SHA-256 of a file's bytes as stored on disk.
inline std::string file_digest(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path.string());
    Sha256 h;
    std::vector<char> chunk(1 << 20);
    while (in) {
        in.read(chunk.data(), static_cast<std::streamsize>(chunk.size()));
        const auto n = in.gcount();
        if (n > 0)
            h.update(std::string_view(chunk.data(), static_cast<std::size_t>(n)));
    }
    return h.hex();
}

} // namespace synthforge::io
