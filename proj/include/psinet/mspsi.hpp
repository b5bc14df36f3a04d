#pragma once

#include <optional>
#include <vector>

#include "psinet/bytes.hpp"
#include "psinet/counters.hpp"
#include "psinet/crypto.hpp"
#include "psinet/cuckoo.hpp"
#include "psinet/rng.hpp"

namespace psinet::mspsi {

using Keyword = Bytes;

inline constexpr size_t kTagSize = 16;  // truncated H; collision bound 2^-128
using Tag = std::array<uint8_t, kTagSize>;

/// A list of documents, each a set of keyword byte strings. Document indices
/// are 1-based and stable; keywords within a document must be unique.
struct Corpus {
    std::vector<std::vector<Keyword>> docs;

    size_t doc_count() const { return docs.size(); }
    size_t total_elements() const;
    void validate() const;  // throws on duplicate keywords within a document
};

struct ServerKey {
    crypto::Scalar s;

    static ServerKey generate(Rng& rng) { return ServerKey{crypto::Scalar::random(rng)}; }
};

/// Per-set tag H(i || pretag) with the document index diversifying the tag.
Tag make_tag(uint64_t doc_index_1based, const crypto::GroupElement& pretag,
             CostCounters* c = nullptr);

/// The precomputed server-side tag set. Canonical form keeps the tags sorted.
struct TagCollection {
    std::vector<Tag> tags;  // sorted, deduplicated
    uint64_t doc_count = 0;
    uint64_t total_elements = 0;  // S

    bool contains(const Tag& t) const;
    Bytes serialize() const;  // "MSPSI1" header + sorted tag bytes
    static std::optional<TagCollection> deserialize(ByteView b);
};

/// Precomputation phase: {H(i || H_G(y)^s)} for every document i and keyword
/// y. Duplicate keywords across documents reuse one pretag exponentiation.
TagCollection precompute(const Corpus& corpus, const ServerKey& key,
                         CostCounters* c = nullptr);

struct BlindedQuery {
    std::vector<crypto::GroupElement> elements;  // H_G(x_i)^c, order preserved

    Bytes serialize() const;
    static std::optional<BlindedQuery> deserialize(ByteView b);
    size_t size() const { return elements.size(); }
};

/// Client-side secret for one query. Never serialized off-device.
struct QuerySecret {
    crypto::Scalar c;
    std::vector<Keyword> keywords;
    size_t real_count = 0;  // leading keywords are real, the rest padding
};

/// Online phase, client: blind the keyword list with a fresh factor c.
/// Rejects an empty list and duplicate keywords. real_count defaults to all.
std::pair<BlindedQuery, QuerySecret> blind(std::vector<Keyword> keywords, Rng& rng,
                                           CostCounters* c = nullptr,
                                           size_t real_count = SIZE_MAX);

struct ReplyElements {
    std::vector<crypto::GroupElement> elements;  // x~_i^s, same order as query

    Bytes serialize() const;
    static std::optional<ReplyElements> deserialize(ByteView b);
    size_t size() const { return elements.size(); }
};

/// Online phase, server: exactly one exponentiation per query element.
ReplyElements reply(const BlindedQuery& query, const ServerKey& key,
                    CostCounters* c = nullptr);

struct ProcessResult {
    std::vector<uint64_t> per_doc;  // I_1..I_N, real keywords only
    uint64_t match_count = 0;       // t = |{d : I_d = real_count}|
};

/// Online phase, client: unblind, tag per document, intersect with the raw
/// tag collection. Throws on length mismatch with the stored secret.
ProcessResult process(const ReplyElements& reply, const QuerySecret& secret,
                      const TagCollection& tc, CostCounters* c = nullptr);

/// Same computation against a cuckoo-compressed tag collection.
ProcessResult process_filtered(const ReplyElements& reply, const QuerySecret& secret,
                               const cuckoo::Filter& cf, uint64_t doc_count,
                               CostCounters* c = nullptr);

// ---------------------------------------------------------------------------
// Benchmark baselines. Both answer the same multi-set question so the cost
// tables can compare counter readings across the three variants.

struct MultiSetResult {
    std::vector<std::vector<Keyword>> intersections;  // per document
};

/// Vanilla DH-PSI run independently against every server set: the server
/// derives a fresh key and a fresh tag collection per set, per execution.
MultiSetResult vanilla_psi(const std::vector<Keyword>& client, const Corpus& corpus,
                           Rng& rng, CostCounters* client_cost = nullptr,
                           CostCounters* server_cost = nullptr);

/// Client-server PSI with precomputation, applied naively per set with one
/// long-term key: tags are H(pretag) without set diversification, so an
/// element shared between two sets maps to the same tag in both.
struct CpsiTagSets {
    std::vector<std::vector<Tag>> per_set;  // sorted per set
};

CpsiTagSets cpsi_precompute(const Corpus& corpus, const ServerKey& key,
                            CostCounters* c = nullptr);

Tag cpsi_tag(const crypto::GroupElement& pretag, CostCounters* c = nullptr);

MultiSetResult cpsi_online(const std::vector<Keyword>& client, const CpsiTagSets& tags,
                           const ServerKey& key, Rng& rng,
                           CostCounters* client_cost = nullptr,
                           CostCounters* server_cost = nullptr);

/// Brute-force ground truth used by the oracle-equivalence tests.
std::vector<uint64_t> intersection_sizes_oracle(const std::vector<Keyword>& client,
                                                const Corpus& corpus);

}  // namespace psinet::mspsi
