#include "psinet/tokens.hpp"

#include <sodium.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace psinet::tokens {

namespace {

crypto::Scalar challenge_scalar(const crypto::GroupElement& commit, ByteView msg) {
    // wide reduction of a 64-byte domain-separated digest
    Bytes in;
    in.reserve(1 + 9 + 4 + 32 + 4 + msg.size());
    auto d1 = crypto::hash_bytes("blindsig-c1", {commit.bytes(), msg});
    auto d2 = crypto::hash_bytes("blindsig-c2", {commit.bytes(), msg});
    uint8_t wide[64];
    std::memcpy(wide, d1.data(), 32);
    std::memcpy(wide + 32, d2.data(), 32);
    return crypto::Scalar::reduce_wide(ByteView(wide, 64));
}

}  // namespace

Bytes BlindSignature::encode() const {
    Bytes out;
    out.reserve(64);
    append(out, commit.bytes());
    append(out, response.bytes());
    return out;
}

std::optional<BlindSignature> BlindSignature::decode(ByteView b) {
    if (b.size() != 64) return std::nullopt;
    auto commit = crypto::GroupElement::decode(b.first(32));
    auto response = crypto::Scalar::decode(b.subspan(32));
    if (!commit || !response) return std::nullopt;
    return BlindSignature{*commit, *response};
}

IssuerKeys IssuerKeys::generate(Rng& rng) {
    IssuerKeys k;
    k.msk = crypto::Scalar::random(rng);
    k.mpk = crypto::GroupElement::base_pow(k.msk);
    return k;
}

bool bs_verify(const crypto::GroupElement& mpk, const BlindSignature& sig, ByteView msg) {
    if (sig.response.is_zero()) return false;
    crypto::Scalar c = challenge_scalar(sig.commit, msg);
    // g^s == R * mpk^c  <=>  g^s * mpk^-c == R; compare encodings directly
    crypto::GroupElement lhs = crypto::GroupElement::base_pow(sig.response);
    crypto::GroupElement rhs;
    if (c.is_zero()) {
        rhs = sig.commit;
    } else {
        auto mc = mpk.pow(c);
        // rhs = R * mpk^c via libsodium point addition
        if (crypto_core_ristretto255_add(rhs.v.data(), sig.commit.v.data(), mc.v.data()) != 0)
            return false;
    }
    return lhs == rhs;
}

SignerSession bs_sign_start(Rng& rng) {
    SignerSession s;
    s.nonce = crypto::Scalar::random(rng);
    s.commit = crypto::GroupElement::base_pow(s.nonce);
    return s;
}

crypto::Scalar bs_sign_finish(const IssuerKeys& keys, const SignerSession& session,
                              const crypto::Scalar& blinded_challenge) {
    // s' = k + c' * msk
    return session.nonce.add(blinded_challenge.mul(keys.msk));
}

std::pair<BlindingState, crypto::Scalar> bs_blind(const crypto::GroupElement& mpk,
                                                  const crypto::GroupElement& issuer_commit,
                                                  ByteView msg, Rng& rng) {
    BlindingState st;
    st.alpha = crypto::Scalar::random(rng);
    st.beta = crypto::Scalar::random(rng);
    // R = R' * g^alpha * mpk^beta
    crypto::GroupElement ga = crypto::GroupElement::base_pow(st.alpha);
    crypto::GroupElement mb = mpk.pow(st.beta);
    crypto::GroupElement r;
    if (crypto_core_ristretto255_add(r.v.data(), issuer_commit.v.data(), ga.v.data()) != 0 ||
        crypto_core_ristretto255_add(r.v.data(), r.v.data(), mb.v.data()) != 0)
        throw std::runtime_error("bs_blind: point addition failed");
    st.commit = r;
    crypto::Scalar c = challenge_scalar(r, msg);
    crypto::Scalar blinded = c.add(st.beta);  // c' = c + beta
    return {st, blinded};
}

BlindSignature bs_unblind(const BlindingState& st, const crypto::Scalar& response) {
    // s = s' + alpha
    return BlindSignature{st.commit, response.add(st.alpha)};
}

// ---------------------------------------------------------------------------

Issuer::Issuer(IssuerKeys keys, RateLimitPolicy policy)
    : keys_(std::move(keys)), policy_(policy) {}

void Issuer::register_journalist(const std::string& id) {
    if (!registered_.insert(id).second)
        throw std::invalid_argument("issuer: duplicate registration for " + id);
}

bool Issuer::is_registered(const std::string& id) const { return registered_.count(id) > 0; }

Issuer::StartResult Issuer::start_session(const std::string& journalist_id, int64_t now_ms,
                                          Rng& rng) {
    StartResult res;
    if (!registered_.count(journalist_id)) return res;
    uint64_t epoch = policy_.epoch_of(now_ms);
    uint32_t& used = issued_[{journalist_id, epoch}];
    if (used >= policy_.tokens_per_epoch) {
        res.retry_after_ms = int64_t(epoch + 1) * policy_.epoch_length_ms - now_ms;
        return res;
    }
    used++;
    SignerSession session = bs_sign_start(rng);
    res.ok = true;
    res.session_id = next_session_++;
    res.commit = session.commit;
    sessions_[res.session_id] = session;
    append(transcript_, res.commit.bytes());
    return res;
}

crypto::Scalar Issuer::finish_session(uint64_t session_id,
                                      const crypto::Scalar& blinded_challenge) {
    auto it = sessions_.find(session_id);
    if (it == sessions_.end()) throw std::invalid_argument("issuer: unknown session");
    append(transcript_, blinded_challenge.bytes());
    crypto::Scalar response = bs_sign_finish(keys_, it->second, blinded_challenge);
    sessions_.erase(it);
    append(transcript_, response.bytes());
    return response;
}

uint32_t Issuer::issued_in_epoch(const std::string& id, uint64_t epoch) const {
    auto it = issued_.find({id, epoch});
    return it == issued_.end() ? 0 : it->second;
}

IssueOutcome acquire_token(Issuer& issuer, const std::string& journalist_id,
                           int64_t now_ms, Rng& rng) {
    IssueOutcome out;
    auto start = issuer.start_session(journalist_id, now_ms, rng);
    if (!start.ok) {
        out.retry_after_ms = start.retry_after_ms;
        return out;
    }
    crypto::SigKeyPair ephemeral = crypto::SigKeyPair::generate(rng);
    auto [state, blinded] =
        bs_blind(issuer.mpk(), start.commit, view(ephemeral.pk), rng);
    crypto::Scalar response = issuer.finish_session(start.session_id, blinded);
    BlindSignature cert = bs_unblind(state, response);
    if (!bs_verify(issuer.mpk(), cert, view(ephemeral.pk)))
        throw std::runtime_error("acquire_token: issuer produced an invalid signature");
    out.ok = true;
    out.token = Token{ephemeral, cert, issuer.policy().epoch_of(now_ms), false};
    return out;
}

// ---------------------------------------------------------------------------

Bytes AuthorizedMessage::encode() const {
    Bytes out;
    Bytes cert_bytes = cert.encode();
    out.reserve(16 + message.size() + sig.size() + pk.size() + cert_bytes.size());
    put_u32be(out, static_cast<uint32_t>(message.size()));
    append(out, view(message));
    put_u32be(out, static_cast<uint32_t>(sig.size()));
    append(out, ByteView(sig.data(), sig.size()));
    put_u32be(out, static_cast<uint32_t>(pk.size()));
    append(out, ByteView(pk.data(), pk.size()));
    put_u32be(out, static_cast<uint32_t>(cert_bytes.size()));
    append(out, view(cert_bytes));
    return out;
}

std::optional<AuthorizedMessage> AuthorizedMessage::decode(ByteView b) {
    auto take = [&b](size_t want) -> std::optional<ByteView> {
        if (b.size() < 4) return std::nullopt;
        uint32_t n = get_u32be(b.data());
        if (b.size() < 4 + size_t(n)) return std::nullopt;
        if (want != 0 && n != want) return std::nullopt;
        ByteView f = b.subspan(4, n);
        b = b.subspan(4 + n);
        return f;
    };
    AuthorizedMessage m;
    auto msg = take(0);
    if (!msg) return std::nullopt;
    m.message.assign(msg->begin(), msg->end());
    auto sig = take(crypto::kSigSize);
    if (!sig) return std::nullopt;
    std::copy(sig->begin(), sig->end(), m.sig.begin());
    auto pk = take(crypto::kSigPublicKeySize);
    if (!pk) return std::nullopt;
    std::copy(pk->begin(), pk->end(), m.pk.begin());
    auto cert = take(64);
    if (!cert) return std::nullopt;
    auto decoded = BlindSignature::decode(*cert);
    if (!decoded || !b.empty()) return std::nullopt;
    m.cert = *decoded;
    return m;
}

AuthorizedMessage authorize(ByteView message, Token& token) {
    if (token.spent) throw std::invalid_argument("authorize: token already spent");
    token.spent = true;
    AuthorizedMessage m;
    m.message.assign(message.begin(), message.end());
    m.sig = crypto::sign(token.key, message);
    m.pk = token.key.pk;
    m.cert = token.cert;
    return m;
}

VerifyStatus verify_authorized(const AuthorizedMessage& bundle,
                               const crypto::GroupElement& mpk, SpendRegistry& registry,
                               uint64_t epoch) {
    if (!crypto::sig_verify(bundle.pk, view(bundle.message), ByteView(bundle.sig.data(), 64)))
        return VerifyStatus::bad_signature;
    if (!bs_verify(mpk, bundle.cert, ByteView(bundle.pk.data(), bundle.pk.size())))
        return VerifyStatus::bad_token;
    if (!registry.check_and_record(bundle.pk, epoch)) return VerifyStatus::replayed;
    return VerifyStatus::ok;
}

// ---------------------------------------------------------------------------

SpendRegistry::SpendRegistry(std::string dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
    load();
}

bool SpendRegistry::seen(const std::array<uint8_t, 32>& pk) const {
    for (const auto& [epoch, set] : by_epoch_)
        if (set.count(pk)) return true;
    return false;
}

bool SpendRegistry::check_and_record(const std::array<uint8_t, 32>& pk, uint64_t epoch) {
    if (seen(pk)) return false;
    by_epoch_[epoch].insert(pk);
    if (!dir_.empty()) persist(pk, epoch);
    return true;
}

void SpendRegistry::prune(uint64_t current_epoch) {
    for (auto it = by_epoch_.begin(); it != by_epoch_.end();) {
        if (current_epoch >= 1 && it->first < current_epoch - 1) {
            if (!dir_.empty()) {
                std::error_code ec;
                std::filesystem::remove(
                    std::filesystem::path(dir_) / ("epoch-" + std::to_string(it->first) + ".log"),
                    ec);
            }
            it = by_epoch_.erase(it);
        } else {
            ++it;
        }
    }
}

size_t SpendRegistry::size() const {
    size_t n = 0;
    for (const auto& [e, s] : by_epoch_) n += s.size();
    return n;
}

void SpendRegistry::persist(const std::array<uint8_t, 32>& pk, uint64_t epoch) {
    std::ofstream f(std::filesystem::path(dir_) / ("epoch-" + std::to_string(epoch) + ".log"),
                    std::ios::app);
    f << to_hex(ByteView(pk.data(), pk.size())) << "\n";
}

void SpendRegistry::load() {
    for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
        std::string name = entry.path().filename().string();
        if (name.rfind("epoch-", 0) != 0) continue;
        uint64_t epoch = std::stoull(name.substr(6));
        std::ifstream f(entry.path());
        std::string line;
        while (std::getline(f, line)) {
            if (line.size() != 64) continue;
            Bytes raw = from_hex(line);
            std::array<uint8_t, 32> pk{};
            std::copy(raw.begin(), raw.end(), pk.begin());
            by_epoch_[epoch].insert(pk);
        }
    }
}

}  // namespace psinet::tokens
