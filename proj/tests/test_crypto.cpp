#include "doctest.h"
#include "psinet/crypto.hpp"
#include "psinet/rng.hpp"

#include <set>

using namespace psinet;
using namespace psinet::crypto;

TEST_CASE("hash_bytes is deterministic and domain-separated") {
    Bytes a = to_bytes("a");
    CHECK(hash_bytes("tag", {view(a)}) == hash_bytes("tag", {view(a)}));

    // length prefixing makes part boundaries unambiguous
    Bytes ab = to_bytes("ab"), c = to_bytes("c"), bc = to_bytes("bc");
    CHECK(hash_bytes("tag", {view(ab), view(c)}) != hash_bytes("tag", {view(a), view(bc)}));

    // distinct domains never collide on equal parts
    CHECK(hash_bytes("addr", {view(a)}) != hash_bytes("key", {view(a)}));
    Bytes empty;
    CHECK(hash_bytes("addr", {view(empty)}) != hash_bytes("key", {view(empty)}));

    CHECK_THROWS(hash_bytes("", {view(a)}));
}

TEST_CASE("hash_to_group: deterministic, total, collision-free in practice") {
    Bytes kw = to_bytes("mossack fonseca");
    CHECK(hash_to_group(view(kw)) == hash_to_group(view(kw)));

    Bytes empty;
    GroupElement e = hash_to_group(view(empty));  // legal, if useless
    CHECK_FALSE(e.is_identity());

    DetRng rng(7);
    std::set<std::array<uint8_t, 32>> seen;
    for (int i = 0; i < 10000; ++i) {
        Bytes k = rng.bytes(12);
        seen.insert(hash_to_group(view(k)).v);
    }
    CHECK(seen.size() == 10000);
}

TEST_CASE("group element encoding round-trips and is size-pinned") {
    DetRng rng(3);
    for (int i = 0; i < 20; ++i) {
        KeyPair kp = KeyPair::generate(rng);
        CHECK(kp.pk.bytes().size() == kElementSize);
        auto decoded = GroupElement::decode(kp.pk.bytes());
        REQUIRE(decoded.has_value());
        CHECK(*decoded == kp.pk);
    }
    Bytes junk(31, 0xab);
    CHECK_FALSE(GroupElement::decode(view(junk)).has_value());
}

TEST_CASE("blind/unblind identity ((H(x)^a)^b)^(a^-1) = H(x)^b") {
    DetRng rng(11);
    for (int i = 0; i < 10; ++i) {
        Bytes kw = rng.bytes(8);
        Scalar a = Scalar::random(rng), b = Scalar::random(rng);
        GroupElement h = hash_to_group(view(kw));
        GroupElement lhs = h.pow(a).pow(b).pow(a.invert());
        GroupElement rhs = h.pow(b);
        CHECK(lhs == rhs);
    }
}

TEST_CASE("scalar decode rejects non-canonical encodings") {
    Bytes all_ff(32, 0xff);
    CHECK_FALSE(Scalar::decode(view(all_ff)).has_value());
    DetRng rng(5);
    Scalar s = Scalar::random(rng);
    auto d = Scalar::decode(s.bytes());
    REQUIRE(d.has_value());
    CHECK(*d == s);
}

TEST_CASE("dh symmetry and degenerate rejection") {
    DetRng rng(1);
    KeyPair a = KeyPair::generate(rng), b = KeyPair::generate(rng);
    CHECK(dh(a.sk, b.pk) == dh(b.sk, a.pk));

    Scalar zero{};
    CHECK_THROWS(dh(zero, a.pk));
    GroupElement identity{};  // all-zero encoding
    CHECK_THROWS(dh(a.sk, identity));

    // three random keypairs -> pairwise secrets all distinct
    KeyPair c = KeyPair::generate(rng);
    auto ab = dh(a.sk, b.pk), ac = dh(a.sk, c.pk), bc = dh(b.sk, c.pk);
    CHECK(ab != ac);
    CHECK(ab != bc);
    CHECK(ac != bc);
}

TEST_CASE("authenticated encryption round-trip and failure modes") {
    DetRng rng(2);
    std::array<uint8_t, 32> key{};
    rng.fill(key.data(), key.size());

    Bytes payload = rng.bytes(1024);
    Bytes ct = ae_encrypt(key, view(payload), rng);
    CHECK(ct.size() == payload.size() + kAeOverhead);

    auto pt = ae_decrypt(key, view(ct));
    REQUIRE(pt.has_value());
    CHECK(*pt == payload);

    // one flipped bit anywhere breaks authentication
    Bytes tampered = ct;
    tampered[tampered.size() / 2] ^= 0x01;
    AeError why{};
    CHECK_FALSE(ae_decrypt(key, view(tampered), &why).has_value());
    CHECK(why == AeError::auth_failed);

    std::array<uint8_t, 32> other{};
    rng.fill(other.data(), other.size());
    CHECK_FALSE(ae_decrypt(other, view(ct)).has_value());

    Bytes stub(10, 0);
    CHECK_FALSE(ae_decrypt(key, view(stub), &why).has_value());
    CHECK(why == AeError::malformed);
}

TEST_CASE("ed25519 sign/verify") {
    DetRng rng(9);
    SigKeyPair kp = SigKeyPair::generate(rng);
    Bytes msg = to_bytes("record bytes");
    auto sig = sign(kp, view(msg));
    CHECK(sig_verify(kp.pk, view(msg), ByteView(sig.data(), sig.size())));
    msg[0] ^= 1;
    CHECK_FALSE(sig_verify(kp.pk, view(msg), ByteView(sig.data(), sig.size())));
}

TEST_CASE("deterministic rng: reproducible, forks are independent") {
    DetRng a(42), b(42);
    CHECK(a.bytes(64) == b.bytes(64));
    DetRng f1 = a.fork("x"), f2 = b.fork("y");
    CHECK(f1.bytes(32) != f2.bytes(32));

    // exponential draws have the right mean (seeded, loose bound)
    DetRng r(17);
    double acc = 0;
    int n = 20000;
    for (int i = 0; i < n; ++i) acc += r.exponential(4.0);
    CHECK(acc / n == doctest::Approx(0.25).epsilon(0.03));
}
