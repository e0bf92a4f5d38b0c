#include "omnidfa/rng.hpp"

#include <cmath>
#include <numbers>

#include "omnidfa/error.hpp"

namespace omnidfa {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view name) {
    return splitmix64(splitmix64(seed) ^ fnv1a(name));
}

}  // namespace

RandomStream::RandomStream(std::uint64_t seed, std::string name)
    : seed_(seed), name_(std::move(name)), engine_(derive_seed(seed_, name_)) {}

std::uint64_t RandomStream::next_u64() {
    ++position_;
    return engine_();
}

double RandomStream::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double RandomStream::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double RandomStream::normal() {
    // 1 - u keeps the log argument in (0, 1].
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t RandomStream::index(std::uint64_t n) {
    if (n == 0) throw Error(ErrorCode::InvalidArgument, "index range must be positive");
    // Rejection sampling removes modulo bias.
    const std::uint64_t limit = max() - max() % n;
    std::uint64_t x = next_u64();
    while (x >= limit) x = next_u64();
    return x % n;
}

void RandomStream::seek(std::uint64_t position) {
    engine_.seed(derive_seed(seed_, name_));
    engine_.discard(position);
    position_ = position;
}

RandomStream seeded_rng(std::uint64_t seed, std::string_view stream) {
    return RandomStream(seed, std::string(stream));
}

}  // namespace omnidfa
