#include "ftdf/random.hpp"

#include <cmath>
#include <numbers>

namespace ftdf {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

std::uint64_t derive_seed(std::uint64_t master, std::string_view stream, std::uint64_t index) {
    return splitmix64(splitmix64(master ^ fnv1a64(stream)) + index);
}

double Rng::uniform() {
    // 53 random mantissa bits
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::below(std::uint64_t bound) {
    // rejection sampling keeps the result exactly uniform
    const std::uint64_t limit = (~std::uint64_t{0}) - ((~std::uint64_t{0}) % bound);
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return x % bound;
}

double Rng::normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace ftdf
