#include "nonins/rng.hpp"

#include <limits>
#include <string>

#include "nonins/error.hpp"
#include "nonins/hash.hpp"

namespace nonins {

Rng Rng::derive(std::uint64_t seed, std::string_view key) {
    std::string material(8, '\0');
    for (int i = 0; i < 8; ++i) material[i] = static_cast<char>((seed >> (8 * i)) & 0xFF);
    material.push_back('\x1f');
    material.append(key);
    const Digest d = sha256(material);
    std::uint64_t derived = 0;
    for (int i = 0; i < 8; ++i) derived |= static_cast<std::uint64_t>(d[i]) << (8 * i);
    return Rng(derived);
}

std::uint64_t Rng::uniform_below(std::uint64_t bound) {
    if (bound == 0) throw Error(ErrorKind::invalid_argument, "uniform_below: bound must be positive");
    // Reject the top partial bucket so every residue is equally likely.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x = 0;
    do {
        x = engine_();
    } while (x >= limit);
    return x % bound;
}

std::uint64_t Rng::uniform_between(std::uint64_t lo, std::uint64_t hi) {
    if (lo > hi) throw Error(ErrorKind::invalid_argument, "uniform_between: empty range");
    const std::uint64_t width = hi - lo;
    if (width == std::numeric_limits<std::uint64_t>::max()) return engine_();
    return lo + uniform_below(width + 1);
}

double Rng::uniform_unit() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

}  // namespace nonins
