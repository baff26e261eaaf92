#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace mimic {

// Philox 4x32-10 block cipher (Salmon et al., SC 2011). Counter-based, so a
// variate is a pure function of (seed, particle, step, substream, draw) and
// simulations are reproducible independent of scheduling.
namespace philox {

inline void round_once(std::array<std::uint32_t, 4>& ctr, std::array<std::uint32_t, 2>& key) {
    constexpr std::uint32_t kMulA = 0xD2511F53u;
    constexpr std::uint32_t kMulB = 0xCD9E8D57u;
    const std::uint64_t prod0 = static_cast<std::uint64_t>(kMulA) * ctr[0];
    const std::uint64_t prod2 = static_cast<std::uint64_t>(kMulB) * ctr[2];
    const std::uint32_t lo0 = static_cast<std::uint32_t>(prod0);
    const std::uint32_t hi0 = static_cast<std::uint32_t>(prod0 >> 32);
    const std::uint32_t lo2 = static_cast<std::uint32_t>(prod2);
    const std::uint32_t hi2 = static_cast<std::uint32_t>(prod2 >> 32);
    ctr = {hi2 ^ ctr[1] ^ key[0], lo2, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += 0x9E3779B9u;
    key[1] += 0xBB67AE85u;
}

inline std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                          std::array<std::uint32_t, 2> key) {
    for (int i = 0; i < 10; ++i) {
        round_once(ctr, key);
    }
    return ctr;
}

}  // namespace philox

/// Substream labels so that draws for different purposes within the same
/// (particle, step) cell never collide.
enum class Substream : std::uint32_t {
    Gaussian = 0,
    Thinning = 1,
    Factor = 2,
    Scratch = 3,
};

/// Stream of variates addressed by (seed, particle, step, substream).
/// Successive draws advance a counter word; nothing else is stateful.
class RandomStream {
public:
    RandomStream(std::uint64_t seed, std::uint64_t particle, std::uint64_t step,
                 Substream substream)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          base_{static_cast<std::uint32_t>(particle),
                static_cast<std::uint32_t>(step),
                (static_cast<std::uint32_t>(substream) << 8) |
                    (static_cast<std::uint32_t>(particle >> 32) & 0xFFu),
                0u} {}

    /// Uniform on the open interval (0, 1).
    double uniform() {
        if (have_cached_uniform_) {
            have_cached_uniform_ = false;
            return cached_uniform_;
        }
        const auto words = next_block();
        const std::uint64_t a =
            (static_cast<std::uint64_t>(words[0]) << 32 | words[1]) >> 11;
        const std::uint64_t b =
            (static_cast<std::uint64_t>(words[2]) << 32 | words[3]) >> 11;
        constexpr double kScale = 1.0 / 9007199254740992.0;  // 2^-53
        cached_uniform_ = (static_cast<double>(b) + 0.5) * kScale;
        have_cached_uniform_ = true;
        return (static_cast<double>(a) + 0.5) * kScale;
    }

    /// Standard normal via Box-Muller; produces pairs, caches the second.
    double normal() {
        if (have_cached_normal_) {
            have_cached_normal_ = false;
            return cached_normal_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 6.283185307179586476925286766559 * u2;
        cached_normal_ = radius * std::sin(angle);
        have_cached_normal_ = true;
        return radius * std::cos(angle);
    }

    double exponential(double rate) { return -std::log(uniform()) / rate; }

private:
    std::array<std::uint32_t, 4> next_block() {
        auto ctr = base_;
        ctr[3] = draw_++;
        return philox::block(ctr, key_);
    }

    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 4> base_;
    std::uint32_t draw_ = 0;
    double cached_uniform_ = 0.0;
    double cached_normal_ = 0.0;
    bool have_cached_uniform_ = false;
    bool have_cached_normal_ = false;
};

/// Poisson count by inversion; intended for small means (rate * dt).
inline std::uint32_t poisson_count(double mean, RandomStream& stream) {
    if (mean <= 0.0) {
        return 0;
    }
    const double u = stream.uniform();
    double p = std::exp(-mean);
    double cumulative = p;
    std::uint32_t k = 0;
    while (u >= cumulative && k < 1000000) {
        ++k;
        p *= mean / static_cast<double>(k);
        cumulative += p;
    }
    return k;
}

}  // namespace mimic
