#include "nonins/hash.hpp"

#include <openssl/evp.h>

#include "nonins/error.hpp"

namespace nonins {

Digest sha256(std::string_view data) {
    Digest out{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr) != 1 ||
        len != out.size()) {
        throw Error(ErrorKind::io, "sha256 digest failed");
    }
    return out;
}

std::string to_hex(const std::uint8_t* data, std::size_t size) {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out;
    out.reserve(size * 2);
    for (std::size_t i = 0; i < size; ++i) {
        out.push_back(kDigits[data[i] >> 4]);
        out.push_back(kDigits[data[i] & 0x0F]);
    }
    return out;
}

std::string sha256_hex(std::string_view data) {
    const Digest d = sha256(data);
    return to_hex(d.data(), d.size());
}

}  // namespace nonins
