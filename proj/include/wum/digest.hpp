#ifndef WUM_DIGEST_HPP
#define WUM_DIGEST_HPP

#include <openssl/evp.h>

#include <array>
#include <string>
#include <string_view>

#include "wum/core.hpp"

namespace wum {

/// Lower-case hex SHA-256 of `data`.
inline std::string sha256_hex(std::string_view data)
{
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
        throw Error("sha256: digest computation failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 0x0F];
    }
    return out;
}

} // namespace wum

#endif
