#include "psinet/rng.hpp"

#include <sodium.h>

#include <cstring>

#include "psinet/crypto.hpp"

namespace psinet {

std::string to_hex(ByteView b) {
    static const char* digits = "0123456789abcdef";
    std::string s;
    s.reserve(b.size() * 2);
    for (uint8_t c : b) {
        s.push_back(digits[c >> 4]);
        s.push_back(digits[c & 0xf]);
    }
    return s;
}

Bytes from_hex(std::string_view hex) {
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        return -1;
    };
    if (hex.size() % 2 != 0) throw std::invalid_argument("hex: odd length");
    Bytes out(hex.size() / 2);
    for (size_t i = 0; i < out.size(); ++i) {
        int hi = nibble(hex[2 * i]), lo = nibble(hex[2 * i + 1]);
        if (hi < 0 || lo < 0) throw std::invalid_argument("hex: bad digit");
        out[i] = static_cast<uint8_t>(hi << 4 | lo);
    }
    return out;
}

DetRng::DetRng(uint64_t seed) {
    crypto::init();
    uint8_t s[8];
    for (int i = 0; i < 8; ++i) s[i] = static_cast<uint8_t>(seed >> (8 * i));
    auto d = crypto::hash_bytes("rng-seed", {ByteView(s, 8)});
    key_ = d;
}

DetRng::DetRng(const std::array<uint8_t, 32>& key) : key_(key) { crypto::init(); }

void DetRng::refill() {
    uint8_t nonce[crypto_stream_chacha20_NONCEBYTES] = {0};
    for (int i = 0; i < 8; ++i) nonce[i] = static_cast<uint8_t>(block_ >> (8 * i));
    crypto_stream_chacha20(buf_.data(), buf_.size(), nonce, key_.data());
    ++block_;
    avail_ = buf_.size();
}

void DetRng::fill(uint8_t* out, size_t n) {
    while (n > 0) {
        if (avail_ == 0) refill();
        size_t take = n < avail_ ? n : avail_;
        std::memcpy(out, buf_.data() + (buf_.size() - avail_), take);
        avail_ -= take;
        out += take;
        n -= take;
    }
}

DetRng DetRng::fork(std::string_view label) const {
    auto d = crypto::hash_bytes("rng-fork", {ByteView(key_.data(), key_.size()), view(label)});
    return DetRng(d);
}

void SystemRng::fill(uint8_t* out, size_t n) {
    crypto::init();
    randombytes_buf(out, n);
}

}  // namespace psinet
