#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <type_traits>
#include <vector>

#include "json.hpp"

#include "synthforge/core/digest.hpp"
#include "synthforge/core/error.hpp"
#include "synthforge/core/volume.hpp"

namespace synthforge::io {

namespace fs = std::filesystem;

/// Sidecar path for a raw array file: "<file>.json".
inline fs::path raw_sidecar_path(const fs::path& data_path)
{
    return fs::path(data_path.string() + ".json");
}

namespace detail {

template <typename T>
constexpr const char* raw_dtype_for()
{
    if constexpr (std::is_same_v<T, std::uint16_t>)
        return "uint16";
    else if constexpr (std::is_same_v<T, float>)
        return "float32";
    else
        return nullptr;
}

inline std::string bytes_digest(const std::vector<char>& bytes)
{
    return sha256_hex(std::string_view(bytes.data(), bytes.size()));
}

} // namespace detail

/// Little-endian array file plus a JSON sidecar holding dims, element kind,
/// dtype, byte order and the SHA-256 of the array bytes.
template <typename T>
void write_raw(const Volume<T>& vol, const fs::path& path)
{
    constexpr const char* dtype = detail::raw_dtype_for<T>();
    if constexpr (dtype == nullptr) {
        throw IoError("unsupported element kind for raw output: " + path.string());
    } else {
        std::vector<char> bytes(vol.size() * sizeof(T));
        std::memcpy(bytes.data(), vol.storage().data(), bytes.size());
        {
            std::ofstream out(path, std::ios::binary | std::ios::trunc);
            if (!out)
                throw IoError("cannot create " + path.string());
            out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
            if (!out)
                throw IoError("write error in " + path.string());
        }
        const nlohmann::json side = {
            {"dims", {vol.dims().nx, vol.dims().ny, vol.dims().nz}},
            {"element_kind", is_label_kind_v<T> ? "label" : "intensity"},
            {"dtype", dtype},
            {"byte_order", "little"},
            {"digest", detail::bytes_digest(bytes)},
        };
        std::ofstream out(raw_sidecar_path(path), std::ios::trunc);
        if (!out)
            throw IoError("cannot create " + raw_sidecar_path(path).string());
        out << side.dump(2) << '\n';
        if (!out)
            throw IoError("write error in " + raw_sidecar_path(path).string());
    }
}

template <typename T>
Volume<T> read_raw(const fs::path& path)
{
    constexpr const char* dtype = detail::raw_dtype_for<T>();
    if constexpr (dtype == nullptr) {
        throw IoError("unsupported element kind for raw input: " + path.string());
    } else {
        nlohmann::json side;
        {
            std::ifstream in(raw_sidecar_path(path));
            if (!in)
                throw IoError("missing raw sidecar " + raw_sidecar_path(path).string());
            try {
                in >> side;
            } catch (const nlohmann::json::exception& e) {
                throw IoError("malformed raw sidecar " + raw_sidecar_path(path).string() + ": " + e.what());
            }
        }
        Dims dims;
        try {
            if (side.at("dtype").get<std::string>() != dtype)
                throw IoError("raw file " + path.string() + " has dtype " + side.at("dtype").get<std::string>() +
                              ", expected " + dtype);
            if (side.at("byte_order").get<std::string>() != "little")
                throw IoError("raw file " + path.string() + " is not little-endian");
            const auto d = side.at("dims");
            dims = {d.at(0).get<int>(), d.at(1).get<int>(), d.at(2).get<int>()};
        } catch (const nlohmann::json::exception& e) {
            throw IoError("malformed raw sidecar " + raw_sidecar_path(path).string() + ": " + e.what());
        }
        if (!dims.valid())
            throw IoError("raw sidecar has invalid dims: " + path.string());
        std::ifstream in(path, std::ios::binary);
        if (!in)
            throw IoError("cannot open " + path.string());
        std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        if (bytes.size() != dims.count() * sizeof(T))
            throw IoError("raw file " + path.string() + " has " + std::to_string(bytes.size()) + " bytes, expected " +
                          std::to_string(dims.count() * sizeof(T)));
        if (side.contains("digest") && side["digest"].get<std::string>() != detail::bytes_digest(bytes))
            throw IoError("digest mismatch for raw file " + path.string());
        Volume<T> vol(dims);
        std::memcpy(vol.storage().data(), bytes.data(), bytes.size());
        return vol;
    }
}

} // namespace synthforge::io
