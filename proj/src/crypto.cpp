#include "psinet/crypto.hpp"

#include <sodium.h>

#include <cstring>
#include <mutex>

namespace psinet::crypto {

void init() {
    static std::once_flag flag;
    std::call_once(flag, [] {
        if (sodium_init() < 0) throw std::runtime_error("sodium_init failed");
    });
}

// ---------------------------------------------------------------------------
// Hashing

namespace {

Bytes encode_parts(std::string_view domain, std::initializer_list<ByteView> parts) {
    if (domain.empty() || domain.size() > 255)
        throw std::invalid_argument("hash domain must be 1..255 bytes");
    size_t total = 1 + domain.size();
    for (const auto& p : parts) total += 4 + p.size();
    Bytes in;
    in.reserve(total);
    in.push_back(static_cast<uint8_t>(domain.size()));
    append(in, view(domain));
    for (const auto& p : parts) {
        put_u32be(in, static_cast<uint32_t>(p.size()));
        append(in, p);
    }
    return in;
}

}  // namespace

std::array<uint8_t, kDigestSize> hash_bytes(std::string_view domain,
                                            std::initializer_list<ByteView> parts) {
    init();
    Bytes in = encode_parts(domain, parts);
    std::array<uint8_t, kDigestSize> out{};
    crypto_generichash(out.data(), out.size(), in.data(), in.size(), nullptr, 0);
    return out;
}

GroupElement hash_to_group(ByteView keyword, CostCounters* c) {
    init();
    Bytes in = encode_parts("hash-to-group", {keyword});
    uint8_t wide[64];
    crypto_generichash(wide, sizeof wide, in.data(), in.size(), nullptr, 0);
    GroupElement e;
    crypto_core_ristretto255_from_hash(e.v.data(), wide);
    if (c) c->hash_to_group++;
    return e;
}

// ---------------------------------------------------------------------------
// Group and scalars

std::optional<GroupElement> GroupElement::decode(ByteView b) {
    init();
    if (b.size() != kElementSize) return std::nullopt;
    GroupElement e;
    std::memcpy(e.v.data(), b.data(), kElementSize);
    if (!crypto_core_ristretto255_is_valid_point(e.v.data())) return std::nullopt;
    return e;
}

GroupElement GroupElement::base_pow(const Scalar& s) {
    init();
    GroupElement e;
    if (crypto_scalarmult_ristretto255_base(e.v.data(), s.v.data()) != 0)
        throw std::invalid_argument("base_pow: zero scalar");
    return e;
}

GroupElement GroupElement::pow(const Scalar& s, CostCounters* c) const {
    GroupElement r;
    if (crypto_scalarmult_ristretto255(r.v.data(), s.v.data(), v.data()) != 0)
        throw std::invalid_argument("pow: degenerate result (identity or zero scalar)");
    if (c) c->group_exp++;
    return r;
}

bool GroupElement::is_identity() const {
    for (uint8_t b : v)
        if (b != 0) return false;
    return true;
}

Scalar Scalar::random(Rng& rng) {
    init();
    uint8_t wide[64];
    Scalar s;
    do {
        rng.fill(wide, sizeof wide);
        crypto_core_ristretto255_scalar_reduce(s.v.data(), wide);
    } while (s.is_zero());
    return s;
}

Scalar Scalar::reduce_wide(ByteView b) {
    init();
    if (b.size() != 64) throw std::invalid_argument("reduce_wide needs 64 bytes");
    Scalar s;
    crypto_core_ristretto255_scalar_reduce(s.v.data(), b.data());
    return s;
}

Scalar Scalar::from_u64(uint64_t x) {
    Scalar s;
    for (int i = 0; i < 8; ++i) s.v[i] = static_cast<uint8_t>(x >> (8 * i));
    return s;
}

std::optional<Scalar> Scalar::decode(ByteView b) {
    init();
    if (b.size() != kScalarSize) return std::nullopt;
    Scalar s;
    std::memcpy(s.v.data(), b.data(), kScalarSize);
    // canonical iff reducing is a no-op
    uint8_t wide[64] = {0};
    std::memcpy(wide, s.v.data(), kScalarSize);
    Scalar reduced;
    crypto_core_ristretto255_scalar_reduce(reduced.v.data(), wide);
    if (!(reduced == s)) return std::nullopt;
    return s;
}

Scalar Scalar::invert(CostCounters* c) const {
    if (is_zero()) throw std::invalid_argument("invert: zero scalar");
    Scalar r;
    crypto_core_ristretto255_scalar_invert(r.v.data(), v.data());
    if (c) c->scalar_invert++;
    return r;
}

Scalar Scalar::add(const Scalar& o) const {
    Scalar r;
    crypto_core_ristretto255_scalar_add(r.v.data(), v.data(), o.v.data());
    return r;
}

Scalar Scalar::mul(const Scalar& o) const {
    Scalar r;
    crypto_core_ristretto255_scalar_mul(r.v.data(), v.data(), o.v.data());
    return r;
}

bool Scalar::is_zero() const {
    uint8_t acc = 0;
    for (uint8_t b : v) acc |= b;
    return acc == 0;
}

KeyPair KeyPair::generate(Rng& rng) {
    KeyPair kp;
    kp.sk = Scalar::random(rng);
    kp.pk = GroupElement::base_pow(kp.sk);
    return kp;
}

std::array<uint8_t, 32> dh(const Scalar& sk, const GroupElement& pk, CostCounters* c) {
    init();
    if (sk.is_zero()) throw std::invalid_argument("dh: zero secret key");
    if (pk.is_identity()) throw std::invalid_argument("dh: identity public key");
    std::array<uint8_t, 32> out{};
    if (crypto_scalarmult_ristretto255(out.data(), sk.v.data(), pk.v.data()) != 0)
        throw std::invalid_argument("dh: degenerate shared secret");
    if (c) c->dh++;
    return out;
}

// ---------------------------------------------------------------------------
// Authenticated encryption

Bytes ae_encrypt(const std::array<uint8_t, 32>& key, ByteView plaintext, Rng& rng,
                 CostCounters* c) {
    init();
    static_assert(crypto_secretbox_KEYBYTES == 32);
    Bytes out(crypto_secretbox_NONCEBYTES + plaintext.size() + crypto_secretbox_MACBYTES);
    rng.fill(out.data(), crypto_secretbox_NONCEBYTES);
    crypto_secretbox_easy(out.data() + crypto_secretbox_NONCEBYTES, plaintext.data(),
                          plaintext.size(), out.data(), key.data());
    if (c) c->ae_encrypt++;
    return out;
}

std::optional<Bytes> ae_decrypt(const std::array<uint8_t, 32>& key, ByteView ciphertext,
                                AeError* why, CostCounters* c) {
    init();
    if (c) c->ae_decrypt++;
    if (ciphertext.size() < crypto_secretbox_NONCEBYTES + crypto_secretbox_MACBYTES) {
        if (why) *why = AeError::malformed;
        return std::nullopt;
    }
    Bytes pt(ciphertext.size() - crypto_secretbox_NONCEBYTES - crypto_secretbox_MACBYTES);
    if (crypto_secretbox_open_easy(pt.data(), ciphertext.data() + crypto_secretbox_NONCEBYTES,
                                   ciphertext.size() - crypto_secretbox_NONCEBYTES,
                                   ciphertext.data(), key.data()) != 0) {
        if (why) *why = AeError::auth_failed;
        return std::nullopt;
    }
    return pt;
}

// ---------------------------------------------------------------------------
// Ed25519

SigKeyPair SigKeyPair::generate(Rng& rng) {
    init();
    SigKeyPair kp;
    uint8_t seed[crypto_sign_SEEDBYTES];
    rng.fill(seed, sizeof seed);
    crypto_sign_seed_keypair(kp.pk.data(), kp.sk.data(), seed);
    return kp;
}

std::array<uint8_t, kSigSize> sign(const SigKeyPair& kp, ByteView msg) {
    std::array<uint8_t, kSigSize> sig{};
    crypto_sign_detached(sig.data(), nullptr, msg.data(), msg.size(), kp.sk.data());
    return sig;
}

bool sig_verify(const std::array<uint8_t, kSigPublicKeySize>& pk, ByteView msg,
                ByteView sig) {
    if (sig.size() != kSigSize) return false;
    return crypto_sign_verify_detached(sig.data(), msg.data(), msg.size(), pk.data()) == 0;
}

}  // namespace psinet::crypto
