#pragma once

#include <array>
#include <initializer_list>
#include <optional>
#include <stdexcept>
#include <string_view>

#include "psinet/bytes.hpp"
#include "psinet/counters.hpp"
#include "psinet/rng.hpp"

namespace psinet::crypto {

/// Must be called before any other function here (idempotent).
void init();

// Group: ristretto255 (prime order, 32-byte canonical encodings). Fixed-size
// encodings keep the byte accounting of the protocol cost tables exact.
inline constexpr size_t kElementSize = 32;
inline constexpr size_t kScalarSize = 32;
inline constexpr size_t kDigestSize = 32;  // H output (ell = 256)

struct Scalar;

struct GroupElement {
    std::array<uint8_t, kElementSize> v{};

    static std::optional<GroupElement> decode(ByteView b);  // validates encoding
    static GroupElement base_pow(const Scalar& s);          // g^s, s != 0

    GroupElement pow(const Scalar& s, CostCounters* c = nullptr) const;
    bool is_identity() const;

    ByteView bytes() const { return ByteView(v.data(), v.size()); }
    bool operator==(const GroupElement& o) const { return v == o.v; }
};

struct Scalar {
    std::array<uint8_t, kScalarSize> v{};  // canonical, little-endian mod p

    static Scalar random(Rng& rng);        // uniform, never zero
    static Scalar reduce_wide(ByteView b); // 64-byte wide reduction
    static Scalar from_u64(uint64_t x);
    static std::optional<Scalar> decode(ByteView b);  // rejects non-canonical

    Scalar invert(CostCounters* c = nullptr) const;  // mod-p inverse, throws on zero
    Scalar add(const Scalar& o) const;
    Scalar mul(const Scalar& o) const;
    bool is_zero() const;

    ByteView bytes() const { return ByteView(v.data(), v.size()); }
    bool operator==(const Scalar& o) const { return v == o.v; }
};

struct KeyPair {
    Scalar sk;
    GroupElement pk;  // g^sk

    static KeyPair generate(Rng& rng);
};

/// Domain-separated hash into 256 bits. The input encoding is unambiguous:
/// 1-byte domain length, domain bytes, then each part as 4-byte big-endian
/// length followed by the raw bytes.
std::array<uint8_t, kDigestSize> hash_bytes(std::string_view domain,
                                            std::initializer_list<ByteView> parts);

/// Hash into the group (uniform): 64-byte expansion of the domain-separated
/// encoding mapped through the group's from-hash primitive.
GroupElement hash_to_group(ByteView keyword, CostCounters* c = nullptr);

/// Diffie-Hellman shared secret pk^sk, returned as the 32-byte encoding.
/// Rejects sk = 0 and any pk for which the result degenerates to the identity.
std::array<uint8_t, 32> dh(const Scalar& sk, const GroupElement& pk,
                           CostCounters* c = nullptr);

// Authenticated encryption (XSalsa20-Poly1305). Ciphertext layout:
// 24-byte nonce || body (plaintext length + 16-byte tag).
inline constexpr size_t kAeOverhead = 24 + 16;

enum class AeError { malformed, auth_failed };

Bytes ae_encrypt(const std::array<uint8_t, 32>& key, ByteView plaintext, Rng& rng,
                 CostCounters* c = nullptr);
std::optional<Bytes> ae_decrypt(const std::array<uint8_t, 32>& key, ByteView ciphertext,
                                AeError* why = nullptr, CostCounters* c = nullptr);

// Ed25519 signatures for the ephemeral token keys.
inline constexpr size_t kSigPublicKeySize = 32;
inline constexpr size_t kSigSize = 64;

struct SigKeyPair {
    std::array<uint8_t, 64> sk{};
    std::array<uint8_t, kSigPublicKeySize> pk{};

    static SigKeyPair generate(Rng& rng);
};

std::array<uint8_t, kSigSize> sign(const SigKeyPair& kp, ByteView msg);
bool sig_verify(const std::array<uint8_t, kSigPublicKeySize>& pk, ByteView msg,
                ByteView sig);

}  // namespace psinet::crypto
