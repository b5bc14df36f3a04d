#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>

#include "psinet/bytes.hpp"
#include "psinet/crypto.hpp"
#include "psinet/rng.hpp"

namespace psinet::tokens {

// ---------------------------------------------------------------------------
// Blind signature over the group (blind Schnorr). The issuer never sees the
// message; the transcript (commitment, blinded challenge, response) carries
// no function of it.

struct BlindSignature {
    crypto::GroupElement commit;  // R
    crypto::Scalar response;      // s,  g^s = R * mpk^c  with  c = H(R || msg)

    Bytes encode() const;  // 64 bytes
    static std::optional<BlindSignature> decode(ByteView b);
};

struct IssuerKeys {
    crypto::Scalar msk;
    crypto::GroupElement mpk;

    static IssuerKeys generate(Rng& rng);
};

bool bs_verify(const crypto::GroupElement& mpk, const BlindSignature& sig, ByteView msg);

/// Issuer-side state for one signing session.
struct SignerSession {
    crypto::Scalar nonce;          // k
    crypto::GroupElement commit;   // R' = g^k
};

SignerSession bs_sign_start(Rng& rng);
crypto::Scalar bs_sign_finish(const IssuerKeys& keys, const SignerSession& session,
                              const crypto::Scalar& blinded_challenge);

/// User-side blinding state between the two issuer messages.
struct BlindingState {
    crypto::Scalar alpha, beta;
    crypto::GroupElement commit;  // unblinded R
};

std::pair<BlindingState, crypto::Scalar> bs_blind(const crypto::GroupElement& mpk,
                                                  const crypto::GroupElement& issuer_commit,
                                                  ByteView msg, Rng& rng);
BlindSignature bs_unblind(const BlindingState& st, const crypto::Scalar& response);

// ---------------------------------------------------------------------------
// Tokens: an ephemeral signing key plus the issuer's blind signature on it.

struct Token {
    crypto::SigKeyPair key;  // (sk_T, pk_T)
    BlindSignature cert;     // C on pk_T
    uint64_t epoch = 0;
    bool spent = false;
};

struct RateLimitPolicy {
    uint32_t tokens_per_epoch = 50;
    int64_t epoch_length_ms = 30ll * 24 * 3600 * 1000;

    uint64_t epoch_of(int64_t now_ms) const {
        return static_cast<uint64_t>(now_ms / epoch_length_ms);
    }
};

/// Organization-side issuer with per-journalist, per-epoch quotas. Records
/// every message it sends or receives so blindness can be checked at the
/// interface.
class Issuer {
public:
    Issuer(IssuerKeys keys, RateLimitPolicy policy);

    const crypto::GroupElement& mpk() const { return keys_.mpk; }
    const RateLimitPolicy& policy() const { return policy_; }

    void register_journalist(const std::string& id);  // throws on duplicate
    bool is_registered(const std::string& id) const;

    struct StartResult {
        bool ok = false;
        uint64_t session_id = 0;
        crypto::GroupElement commit;   // R'
        int64_t retry_after_ms = 0;    // time left in the epoch when refused
    };
    StartResult start_session(const std::string& journalist_id, int64_t now_ms, Rng& rng);
    crypto::Scalar finish_session(uint64_t session_id, const crypto::Scalar& blinded_challenge);

    const Bytes& transcript() const { return transcript_; }
    uint32_t issued_in_epoch(const std::string& id, uint64_t epoch) const;

private:
    IssuerKeys keys_;
    RateLimitPolicy policy_;
    std::set<std::string> registered_;
    std::map<std::pair<std::string, uint64_t>, uint32_t> issued_;
    std::unordered_map<uint64_t, SignerSession> sessions_;
    uint64_t next_session_ = 1;
    Bytes transcript_;
};

/// Run both halves of the issuance protocol in-process.
struct IssueOutcome {
    bool ok = false;
    Token token;
    int64_t retry_after_ms = 0;
};
IssueOutcome acquire_token(Issuer& issuer, const std::string& journalist_id,
                           int64_t now_ms, Rng& rng);

// ---------------------------------------------------------------------------
// Authorized bundles and replay detection.

struct AuthorizedMessage {
    Bytes message;
    std::array<uint8_t, crypto::kSigSize> sig{};           // sigma, by sk_T
    std::array<uint8_t, crypto::kSigPublicKeySize> pk{};   // pk_T
    BlindSignature cert;                                   // C

    Bytes encode() const;  // message || sigma || pk_T || C, each length-prefixed
    static std::optional<AuthorizedMessage> decode(ByteView b);
};

/// Signs the message with the token's ephemeral key. Throws if the token was
/// already spent locally.
AuthorizedMessage authorize(ByteView message, Token& token);

enum class VerifyStatus { ok, bad_signature, bad_token, replayed };

/// One-time-use registry of seen token keys, partitioned by epoch. The check
/// and the recording are a single atomic step under the single-writer
/// contract. Optionally persists as an append-only file per epoch.
class SpendRegistry {
public:
    SpendRegistry() = default;
    explicit SpendRegistry(std::string dir);  // loads existing epoch files

    bool seen(const std::array<uint8_t, 32>& pk) const;
    /// False if already present; records (and persists) otherwise.
    bool check_and_record(const std::array<uint8_t, 32>& pk, uint64_t epoch);
    /// Drops partitions older than the previous epoch.
    void prune(uint64_t current_epoch);
    size_t size() const;

private:
    std::string dir_;
    std::map<uint64_t, std::set<std::array<uint8_t, 32>>> by_epoch_;
    void persist(const std::array<uint8_t, 32>& pk, uint64_t epoch);
    void load();
};

VerifyStatus verify_authorized(const AuthorizedMessage& bundle,
                               const crypto::GroupElement& mpk, SpendRegistry& registry,
                               uint64_t epoch);

}  // namespace psinet::tokens
