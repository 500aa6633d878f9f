#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include <openssl/evp.h>

#include "synthforge/core/error.hpp"
#include "synthforge/core/volume.hpp"

namespace synthforge {

/// Incremental SHA-256, hex-encoded on finish.
class Sha256 {
public:
    Sha256() : ctx_(EVP_MD_CTX_new())
    {
        if (!ctx_ || EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr) != 1)
            throw Error("failed to initialise SHA-256");
    }
    ~Sha256() { EVP_MD_CTX_free(ctx_); }
    Sha256(const Sha256&) = delete;
    Sha256& operator=(const Sha256&) = delete;

    Sha256& update(std::span<const std::uint8_t> bytes)
    {
        EVP_DigestUpdate(ctx_, bytes.data(), bytes.size());
        return *this;
    }
    Sha256& update(std::string_view s)
    {
        EVP_DigestUpdate(ctx_, s.data(), s.size());
        return *this;
    }

    std::string hex()
    {
        std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
        unsigned int len = 0;
        EVP_DigestFinal_ex(ctx_, md.data(), &len);
        static constexpr char digits[] = "0123456789abcdef";
        std::string out;
        out.reserve(2 * len);
        for (unsigned i = 0; i < len; ++i) {
            out.push_back(digits[md[i] >> 4]);
            out.push_back(digits[md[i] & 0xF]);
        }
        return out;
    }

private:
    EVP_MD_CTX* ctx_;
};

inline std::string sha256_hex(std::string_view bytes)
{
    return Sha256{}.update(bytes).hex();
}

/// Digest of a volume's dims and little-endian element bytes.
template <typename T>
std::string volume_digest(const Volume<T>& vol)
{
    static_assert(std::endian::native == std::endian::little, "big-endian hosts are not supported");
    Sha256 h;
    const std::string header = to_string(vol.dims()) + ":" + std::to_string(sizeof(T)) + ":";
    h.update(header);
    h.update(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(vol.storage().data()),
                                           vol.size() * sizeof(T)));
    return h.hex();
}

} // namespace synthforge
