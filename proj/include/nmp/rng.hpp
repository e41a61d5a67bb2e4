#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace nmp {

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Derives a stream key from a master seed and a path of coordinates
// (owner id, replicate, ...). Order-sensitive.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
    std::uint64_t h = mix64(master);
    for (std::uint64_t c : path) h = mix64(h ^ mix64(c + 0x632be59bd9b4e019ULL));
    return h;
}

// Counter-based generator: output n of a stream is mix64(key + n * gamma).
// Streams are addressed by key, so results never depend on which thread
// draws them or in which order owners are processed.
class StreamRng {
public:
    using result_type = std::uint64_t;

    explicit StreamRng(std::uint64_t key) : state_(key) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform() < p; }

    // Uniform on [0, n) by rejection, n > 0.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = max() - max() % n;
        std::uint64_t x;
        do {
            x = (*this)();
        } while (x >= limit);
        return x % n;
    }

private:
    std::uint64_t state_;
};

} // namespace nmp
