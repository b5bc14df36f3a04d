#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace psinet {

using Bytes = std::vector<uint8_t>;
using ByteView = std::span<const uint8_t>;

/// 32-byte pigeonhole mailbox address (an H digest).
using Addr = std::array<uint8_t, 32>;

inline Bytes to_bytes(std::string_view s) {
    return Bytes(s.begin(), s.end());
}

inline std::string to_string(ByteView b) {
    return std::string(reinterpret_cast<const char*>(b.data()), b.size());
}

inline ByteView view(const Bytes& b) { return ByteView(b.data(), b.size()); }

template <size_t N>
inline ByteView view(const std::array<uint8_t, N>& a) {
    return ByteView(a.data(), N);
}

inline ByteView view(std::string_view s) {
    return ByteView(reinterpret_cast<const uint8_t*>(s.data()), s.size());
}

inline void append(Bytes& out, ByteView b) { out.insert(out.end(), b.begin(), b.end()); }

inline void put_u16be(Bytes& out, uint16_t v) {
    out.push_back(static_cast<uint8_t>(v >> 8));
    out.push_back(static_cast<uint8_t>(v));
}

inline void put_u32be(Bytes& out, uint32_t v) {
    for (int i = 3; i >= 0; --i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

inline void put_u64be(Bytes& out, uint64_t v) {
    for (int i = 7; i >= 0; --i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

inline uint16_t get_u16be(const uint8_t* p) {
    return static_cast<uint16_t>((uint16_t(p[0]) << 8) | uint16_t(p[1]));
}

inline uint32_t get_u32be(const uint8_t* p) {
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | p[i];
    return v;
}

inline uint64_t get_u64be(const uint8_t* p) {
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | p[i];
    return v;
}

inline std::array<uint8_t, 8> u64be_bytes(uint64_t v) {
    std::array<uint8_t, 8> a{};
    for (int i = 0; i < 8; ++i) a[i] = static_cast<uint8_t>(v >> (8 * (7 - i)));
    return a;
}

std::string to_hex(ByteView b);
Bytes from_hex(std::string_view hex);  // throws std::invalid_argument on bad input

/// Constant-size big-endian-free equality for containers of bytes.
inline bool bytes_equal(ByteView a, ByteView b) {
    return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size()) == 0;
}

struct ArrayHash {
    template <size_t N>
    size_t operator()(const std::array<uint8_t, N>& a) const {
        // FNV-1a over the array; addresses/keys are already uniform
        uint64_t h = 1469598103934665603ull;
        for (uint8_t c : a) h = (h ^ c) * 1099511628211ull;
        return static_cast<size_t>(h);
    }
};

}  // namespace psinet
