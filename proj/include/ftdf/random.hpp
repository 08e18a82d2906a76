#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace ftdf {

/// One step of the SplitMix64 mixer.
std::uint64_t splitmix64(std::uint64_t x);

/// Derives a child seed from a master seed, a named stream and an index.
///
///   derive_seed(m, s, i) = splitmix64(splitmix64(m ^ fnv1a64(s)) + i)
///
/// Every random decision in the toolkit draws from an engine seeded this
/// way, so one master seed fixes the whole run regardless of thread count.
std::uint64_t derive_seed(std::uint64_t master, std::string_view stream, std::uint64_t index = 0);

/// 64-bit FNV-1a hash, used to turn stream names into constants.
std::uint64_t fnv1a64(std::string_view text);

/// Random source with distribution code fixed here rather than left to the
/// standard library, whose distributions differ across implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    /// Uniform on [0, 1).
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Uniform integer on [0, bound), bound > 0.
    std::uint64_t below(std::uint64_t bound);
    /// Standard normal via Box-Muller (one value per call, no caching).
    double normal();

    template <class T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace ftdf
