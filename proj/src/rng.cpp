#include "pomdplab/rng.hpp"

namespace pomdplab {

std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t derive_stream_seed(const SeedSpec& spec, std::uint64_t salt) {
    std::uint64_t state = spec.master;
    std::uint64_t a = splitmix64(state);
    state ^= fnv1a64(spec.phase);
    std::uint64_t b = splitmix64(state);
    state ^= spec.index;
    std::uint64_t c = splitmix64(state);
    state ^= salt;
    std::uint64_t d = splitmix64(state);
    return a ^ (b << 1 | b >> 63) ^ c ^ d;
}

int Stream::uniform_int(int n) {
    if (n <= 1) return 0;
    const std::uint64_t un = static_cast<std::uint64_t>(n);
    const std::uint64_t threshold = (0 - un) % un;
    for (;;) {
        std::uint64_t x = gen_();
        if (x >= threshold) return static_cast<int>(x % un);
    }
}

int Stream::categorical(const double* p, int n) {
    const double u = uniform01();
    double cum = 0.0;
    int last_positive = 0;
    for (int i = 0; i < n; ++i) {
        if (p[i] > 0.0) last_positive = i;
        cum += p[i];
        if (u < cum) return i;
    }
    return last_positive;
}

}  // namespace pomdplab
