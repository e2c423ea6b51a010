#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace netrepair {

/// Named substreams. A stream is derived as splitmix64(seed ^ splitmix64(tag)),
/// so each consumer gets an independent, reproducible sequence from one seed.
enum class Stream : std::uint64_t {
    Instance = 1,
    Crn = 2,
    OpiOffline = 3,
    OpiNested = 4,
    Oracle = 5,
    RandomPolicy = 6,
};

std::uint64_t splitmix64(std::uint64_t x);

/// Seedable generator whose output does not depend on the standard library
/// vendor: the mt19937_64 sequence is fixed by the standard, and the
/// conversions to doubles/integers below are our own.
class Rng {
public:
    explicit Rng(std::uint64_t seed);
    Rng(std::uint64_t seed, Stream stream);
    Rng(std::uint64_t seed, Stream stream, std::uint64_t substream);

    std::uint64_t next() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer on [0, n), rejection sampled (no modulo bias).
    std::uint64_t below(std::uint64_t n);
    /// Uniform integer on [lo, hi].
    int integer(int lo, int hi);

private:
    std::mt19937_64 engine_;
};

/// Common-random-number list: `length` uniforms drawn from the Crn stream of `seed`.
std::vector<double> make_crn(std::uint64_t seed, std::size_t length);

}  // namespace netrepair
