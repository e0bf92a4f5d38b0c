#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <string_view>

namespace omnidfa {

/// Named deterministic random stream. Every stream is derived from a
/// (seed, name) pair, so adding a consumer never shifts another consumer's
/// sequence. The number of 64-bit draws consumed is tracked so a stream can
/// be serialized and restored exactly.
class RandomStream {
public:
    using result_type = std::uint64_t;

    RandomStream(std::uint64_t seed, std::string name);

    static constexpr result_type min() { return std::numeric_limits<result_type>::min(); }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
    result_type operator()() { return next_u64(); }

    std::uint64_t next_u64();

    /// Uniform in [0, 1) with 53 bits of resolution.
    double uniform();
    double uniform(double lo, double hi);
    /// Standard normal via Box-Muller; consumes exactly two draws.
    double normal();
    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t index(std::uint64_t n);

    std::uint64_t seed() const noexcept { return seed_; }
    const std::string& name() const noexcept { return name_; }
    std::uint64_t position() const noexcept { return position_; }

    /// Rewinds to the start of the stream and skips `position` draws.
    void seek(std::uint64_t position);

private:
    std::uint64_t seed_;
    std::string name_;
    std::mt19937_64 engine_;
    std::uint64_t position_ = 0;
};

RandomStream seeded_rng(std::uint64_t seed, std::string_view stream);

/// Fisher-Yates shuffle driven by a RandomStream (portable across standard
/// libraries, unlike std::shuffle).
template <typename Container>
void shuffle(Container& items, RandomStream& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.index(i));
        using std::swap;
        swap(items[i - 1], items[j]);
    }
}

}  // namespace omnidfa
