#include "netrepair/rng.hpp"

#include <limits>
#include <stdexcept>

namespace netrepair {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

Rng::Rng(std::uint64_t seed, Stream stream)
    : engine_(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(stream)))) {}

Rng::Rng(std::uint64_t seed, Stream stream, std::uint64_t substream)
    : engine_(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(stream)) ^
                         splitmix64(substream + 0x5851f42d4c957f2dULL))) {}

std::uint64_t Rng::below(std::uint64_t n) {
    if (n == 0) {
        throw std::invalid_argument("Rng::below: empty range");
    }
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t r = engine_();
    while (r >= limit) {
        r = engine_();
    }
    return r % n;
}

int Rng::integer(int lo, int hi) {
    if (hi < lo) {
        throw std::invalid_argument("Rng::integer: hi < lo");
    }
    const auto span = static_cast<std::uint64_t>(static_cast<std::int64_t>(hi) - lo) + 1;
    return lo + static_cast<int>(below(span));
}

std::vector<double> make_crn(std::uint64_t seed, std::size_t length) {
    Rng rng(seed, Stream::Crn);
    std::vector<double> z(length);
    for (auto& u : z) {
        u = rng.uniform();
    }
    return z;
}

}  // namespace netrepair
