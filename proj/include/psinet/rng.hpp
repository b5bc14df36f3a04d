#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <string_view>

#include "psinet/bytes.hpp"

namespace psinet {

/// Byte-level randomness source. All randomness in the library flows through
/// this interface so simulations can be made fully deterministic.
class Rng {
public:
    virtual ~Rng() = default;
    virtual void fill(uint8_t* out, size_t n) = 0;

    Bytes bytes(size_t n) {
        Bytes b(n);
        fill(b.data(), n);
        return b;
    }

    uint64_t u64() {
        uint8_t b[8];
        fill(b, 8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= uint64_t(b[i]) << (8 * i);
        return v;
    }

    /// Uniform in [0, 1).
    double uniform01() { return double(u64() >> 11) * 0x1.0p-53; }

    /// Unbiased uniform in [0, n).
    uint64_t below(uint64_t n) {
        uint64_t limit = n * (UINT64_MAX / n);
        uint64_t v;
        do { v = u64(); } while (v >= limit);
        return v % n;
    }

    /// Exponential inter-arrival with the given rate (mean 1/rate).
    double exponential(double rate) { return -std::log1p(-uniform01()) / rate; }
};

/// Deterministic ChaCha20-based stream. Same key => same byte stream,
/// independent of platform and stdlib.
class DetRng : public Rng {
public:
    explicit DetRng(uint64_t seed);
    explicit DetRng(const std::array<uint8_t, 32>& key);
    void fill(uint8_t* out, size_t n) override;

    /// Independent labelled substream; forking does not disturb this stream.
    DetRng fork(std::string_view label) const;

private:
    std::array<uint8_t, 32> key_{};
    uint64_t block_ = 0;
    std::array<uint8_t, 512> buf_{};
    size_t avail_ = 0;
    void refill();
};

/// OS entropy (libsodium randombytes).
class SystemRng : public Rng {
public:
    void fill(uint8_t* out, size_t n) override;
};

}  // namespace psinet
