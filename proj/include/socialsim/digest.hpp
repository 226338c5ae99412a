#ifndef SOCIALSIM_DIGEST_HPP
#define SOCIALSIM_DIGEST_HPP

#include <array>
#include <stdexcept>
#include <string>
#include <string_view>

#include <openssl/evp.h>

namespace socialsim {

inline std::string sha256_hex(std::string_view data) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[md[i] >> 4]);
        out.push_back(hex[md[i] & 0xf]);
    }
    return out;
}

}  // namespace socialsim

#endif  // SOCIALSIM_DIGEST_HPP
