#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace pomdplab {

/// Identifies one episode's random stream. The derivation
/// (master, phase, index) -> stream is injective and independent of any
/// execution schedule, so batches can run on any number of workers and
/// still reproduce bit-identically.
struct SeedSpec {
    std::uint64_t master = 0;
    std::string phase;
    std::uint64_t index = 0;
};

std::uint64_t fnv1a64(const std::string& s);
std::uint64_t splitmix64(std::uint64_t& state);

/// Collapses a SeedSpec into one 64-bit stream seed. `salt` separates
/// substreams that share a SeedSpec (environment vs. policy draws).
std::uint64_t derive_stream_seed(const SeedSpec& spec, std::uint64_t salt);

/// Deterministic random stream. All sampling helpers are implemented on
/// top of raw mt19937_64 output; none of the standard <random>
/// distributions are used, since their output is implementation-defined.
class Stream {
public:
    Stream() : gen_(0) {}
    explicit Stream(std::uint64_t seed) : gen_(seed) {}
    explicit Stream(const SeedSpec& spec, std::uint64_t salt)
        : gen_(derive_stream_seed(spec, salt)) {}

    /// Uniform double in [0, 1).
    double uniform01() { return (gen_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n). Debiased via rejection.
    int uniform_int(int n);

    /// Inverse-CDF draw over p[0..n). Cumulative sums are taken in index
    /// order and compared with a strict upper bound; if floating-point
    /// dust leaves the total just below the draw, the last index with
    /// positive mass is returned.
    int categorical(const double* p, int n);
    int categorical(const std::vector<double>& p) {
        return categorical(p.data(), static_cast<int>(p.size()));
    }

    std::uint64_t raw() { return gen_(); }

private:
    std::mt19937_64 gen_;
};

}  // namespace pomdplab
