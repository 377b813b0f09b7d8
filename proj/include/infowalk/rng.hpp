#pragma once

#include <cstdint>

namespace infowalk {

// SplitMix64 finalizer. Good avalanche, cheap, and bit-stable across
// platforms, which keeps every artifact byte-identical for a fixed seed.
inline uint64_t mix64(uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline uint64_t mix64(uint64_t a, uint64_t b) { return mix64(a ^ mix64(b)); }

inline double u64_to_unit(uint64_t h) {
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

// Stateful generator used where a plain stream is enough (initialization,
// negative sampling, shuffles).
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(mix64(seed, 0x5eedULL)) {}

    uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1).
    double next_unit() { return u64_to_unit(next_u64()); }

    // Uniform in [0, n). Lemire's multiply-shift; slight modulo bias is
    // irrelevant at 64 bits.
    uint64_t next_below(uint64_t n) {
        return static_cast<uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    // Uniform in [lo, hi).
    double next_range(double lo, double hi) {
        return lo + (hi - lo) * next_unit();
    }

private:
    uint64_t state_;
};

// Counter-based randomness for walkers: the draw is a pure function of
// (seed, walker, step, trial, purpose), so any machine can reproduce a
// walker's choices without carrying generator state in the message.
struct WalkRandom {
    uint64_t seed;

    uint64_t raw(uint64_t walker, uint64_t step, uint64_t trial,
                 uint64_t purpose) const {
        uint64_t h = mix64(seed, walker);
        h = mix64(h, step);
        h = mix64(h, (trial << 2) | purpose);
        return h;
    }

    double unit(uint64_t walker, uint64_t step, uint64_t trial,
                uint64_t purpose) const {
        return u64_to_unit(raw(walker, step, trial, purpose));
    }

    uint64_t below(uint64_t walker, uint64_t step, uint64_t trial,
                   uint64_t purpose, uint64_t n) const {
        return static_cast<uint64_t>(
            (static_cast<unsigned __int128>(raw(walker, step, trial, purpose)) *
             n) >> 64);
    }
};

// Purpose tags for WalkRandom draws.
enum : uint64_t {
    kDrawCandidate = 0,
    kDrawAccept = 1,
};

} // namespace infowalk
