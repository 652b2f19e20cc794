#pragma once

#include <cmath>
#include <cstdint>

namespace voxdiff {

// SplitMix64 finalizer (Stafford mix13). Bijective with full avalanche.
constexpr uint64_t mix64(uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

constexpr uint64_t absorb(uint64_t digest, uint64_t word) noexcept {
    return mix64((digest + kGolden) ^ word);
}

// Stream tags used to derive independent sub-streams. Values are arbitrary
// but fixed: changing them changes every seeded output.
namespace stream_tag {
constexpr uint64_t init = 1;        // chain starting noise y_T
constexpr uint64_t step = 2;        // per-step injected noise
constexpr uint64_t plane = 3;       // per-plane chain (joint 3D inference)
constexpr uint64_t gamma = 4;       // noise-level draws during training
constexpr uint64_t eps = 5;         // training noise fields
constexpr uint64_t sample = 6;      // training sample/patch selection
constexpr uint64_t volume = 7;      // per-volume generation
constexpr uint64_t noise = 8;       // degradation noise
constexpr uint64_t weights = 9;     // network initialization
}  // namespace stream_tag

// Counter-based random stream. A stream is identified by its accumulated key
// (seed plus the chain of child tags); draw i of a given stream is a pure
// function of (key, i). Sub-streams derived through child() are independent
// of each other and of the parent's counter sequence, so work split across
// threads draws identical values regardless of the execution order.
class RngStream {
  public:
    explicit RngStream(uint64_t seed) : key_(absorb(0x564f58444946460aULL, seed)) {}

    RngStream child(uint64_t tag) const {
        RngStream s;
        s.key_ = absorb(key_, tag);
        return s;
    }

    uint64_t key() const noexcept { return key_; }
    uint64_t counter() const noexcept { return counter_; }

    // Stateless indexed access.
    uint64_t u64_at(uint64_t i) const noexcept { return mix64(key_ + kGolden * (i + 1)); }

    double uniform01_at(uint64_t i) const noexcept {
        // strictly inside (0, 1): safe for logs and open-interval supports
        return (static_cast<double>(u64_at(i) >> 11) + 0.5) * 0x1.0p-53;
    }

    double normal_at(uint64_t i) const noexcept {
        const double u1 = uniform01_at(2 * i);
        const double u2 = uniform01_at(2 * i + 1);
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    // Sequential access; (seed, tags, draw count) fully determines the value.
    uint64_t next_u64() { return u64_at(counter_++); }
    double uniform01() { return uniform01_at(counter_++); }

    double normal() {
        const uint64_t i = counter_;
        counter_ += 2;
        const double u1 = uniform01_at(i);
        const double u2 = uniform01_at(i + 1);
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    // Uniform over {0, ..., n-1}.
    uint64_t uniform_int(uint64_t n) {
        return static_cast<uint64_t>(uniform01() * static_cast<double>(n)) % n;
    }

    // Poisson draw: Knuth multiplication below 30, Hormann's PTRS transformed
    // rejection above. Consumes a variable number of uniforms.
    long poisson(double mean) {
        if (mean <= 0.0) return 0;
        if (mean < 30.0) {
            const double limit = std::exp(-mean);
            long k = 0;
            double p = 1.0;
            do {
                ++k;
                p *= uniform01();
            } while (p > limit);
            return k - 1;
        }
        const double b = 0.931 + 2.53 * std::sqrt(mean);
        const double a = -0.059 + 0.02483 * b;
        const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
        const double v_r = 0.9277 - 3.6224 / (b - 2.0);
        const double log_mean = std::log(mean);
        for (;;) {
            double u = uniform01() - 0.5;
            double v = uniform01();
            const double us = 0.5 - std::abs(u);
            const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
            if (us >= 0.07 && v <= v_r) return static_cast<long>(kf);
            if (kf < 0.0 || (us < 0.013 && v > us)) continue;
            const double k = kf;
            if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
                k * log_mean - mean - std::lgamma(k + 1.0)) {
                return static_cast<long>(kf);
            }
        }
    }

  private:
    RngStream() = default;

    uint64_t key_ = 0;
    uint64_t counter_ = 0;
};

}  // namespace voxdiff
