#include "psinet/mspsi.hpp"

#include <algorithm>
#include <cstring>
#include <map>
#include <set>
#include <stdexcept>

namespace psinet::mspsi {

namespace {
constexpr char kMagic[6] = {'M', 'S', 'P', 'S', 'I', '1'};
}

size_t Corpus::total_elements() const {
    size_t s = 0;
    for (const auto& d : docs) s += d.size();
    return s;
}

void Corpus::validate() const {
    for (const auto& d : docs) {
        std::set<Keyword> seen(d.begin(), d.end());
        if (seen.size() != d.size())
            throw std::invalid_argument("corpus: duplicate keyword within a document");
    }
}

Tag make_tag(uint64_t doc_index_1based, const crypto::GroupElement& pretag,
             CostCounters* c) {
    auto idx = u64be_bytes(doc_index_1based);
    auto d = crypto::hash_bytes("tag", {ByteView(idx.data(), 8), pretag.bytes()});
    if (c) c->tag_hash++;
    Tag t;
    std::memcpy(t.data(), d.data(), kTagSize);
    return t;
}

bool TagCollection::contains(const Tag& t) const {
    return std::binary_search(tags.begin(), tags.end(), t);
}

Bytes TagCollection::serialize() const {
    Bytes out;
    out.reserve(6 + 2 + 16 + tags.size() * kTagSize);
    append(out, ByteView(reinterpret_cast<const uint8_t*>(kMagic), 6));
    out.push_back(static_cast<uint8_t>(crypto::kElementSize));
    out.push_back(static_cast<uint8_t>(kTagSize));
    put_u64be(out, doc_count);
    put_u64be(out, total_elements);
    for (const auto& t : tags) append(out, ByteView(t.data(), t.size()));
    return out;
}

std::optional<TagCollection> TagCollection::deserialize(ByteView b) {
    if (b.size() < 24) return std::nullopt;
    if (std::memcmp(b.data(), kMagic, 6) != 0) return std::nullopt;
    if (b[6] != crypto::kElementSize || b[7] != kTagSize) return std::nullopt;
    TagCollection tc;
    tc.doc_count = get_u64be(b.data() + 8);
    tc.total_elements = get_u64be(b.data() + 16);
    size_t off = 24;
    if ((b.size() - off) % kTagSize != 0) return std::nullopt;
    size_t n = (b.size() - off) / kTagSize;
    tc.tags.resize(n);
    for (size_t i = 0; i < n; ++i)
        std::memcpy(tc.tags[i].data(), b.data() + off + i * kTagSize, kTagSize);
    if (!std::is_sorted(tc.tags.begin(), tc.tags.end())) return std::nullopt;
    return tc;
}

TagCollection precompute(const Corpus& corpus, const ServerKey& key, CostCounters* c) {
    if (corpus.docs.empty()) throw std::invalid_argument("precompute: empty corpus");
    corpus.validate();

    // One pretag exponentiation per distinct keyword; repeats are amortized.
    std::map<Keyword, crypto::GroupElement> pretags;
    TagCollection tc;
    tc.doc_count = corpus.docs.size();
    tc.total_elements = corpus.total_elements();
    tc.tags.reserve(tc.total_elements);
    for (size_t i = 0; i < corpus.docs.size(); ++i) {
        for (const auto& kw : corpus.docs[i]) {
            auto it = pretags.find(kw);
            if (it == pretags.end()) {
                auto pt = crypto::hash_to_group(view(kw), c).pow(key.s, c);
                it = pretags.emplace(kw, pt).first;
            }
            tc.tags.push_back(make_tag(i + 1, it->second, c));
        }
    }
    std::sort(tc.tags.begin(), tc.tags.end());
    tc.tags.erase(std::unique(tc.tags.begin(), tc.tags.end()), tc.tags.end());
    return tc;
}

Bytes BlindedQuery::serialize() const {
    Bytes out;
    out.reserve(4 + elements.size() * crypto::kElementSize);
    put_u32be(out, static_cast<uint32_t>(elements.size()));
    for (const auto& e : elements) append(out, e.bytes());
    return out;
}

std::optional<BlindedQuery> BlindedQuery::deserialize(ByteView b) {
    if (b.size() < 4) return std::nullopt;
    uint32_t n = get_u32be(b.data());
    if (b.size() != 4 + size_t(n) * crypto::kElementSize) return std::nullopt;
    BlindedQuery q;
    q.elements.reserve(n);
    for (uint32_t i = 0; i < n; ++i) {
        auto e = crypto::GroupElement::decode(
            b.subspan(4 + size_t(i) * crypto::kElementSize, crypto::kElementSize));
        if (!e) return std::nullopt;  // malformed element rejects the whole query
        q.elements.push_back(*e);
    }
    return q;
}

Bytes ReplyElements::serialize() const {
    Bytes out;
    out.reserve(4 + elements.size() * crypto::kElementSize);
    put_u32be(out, static_cast<uint32_t>(elements.size()));
    for (const auto& e : elements) append(out, e.bytes());
    return out;
}

std::optional<ReplyElements> ReplyElements::deserialize(ByteView b) {
    auto q = BlindedQuery::deserialize(b);
    if (!q) return std::nullopt;
    return ReplyElements{std::move(q->elements)};
}

std::pair<BlindedQuery, QuerySecret> blind(std::vector<Keyword> keywords, Rng& rng,
                                           CostCounters* c, size_t real_count) {
    if (keywords.empty()) throw std::invalid_argument("blind: empty keyword list");
    if (real_count == SIZE_MAX) real_count = keywords.size();
    if (real_count == 0 || real_count > keywords.size())
        throw std::invalid_argument("blind: bad real_count");
    std::set<Keyword> seen(keywords.begin(), keywords.end());
    if (seen.size() != keywords.size())
        throw std::invalid_argument("blind: duplicate keywords in one query");

    QuerySecret secret;
    secret.c = crypto::Scalar::random(rng);
    secret.keywords = std::move(keywords);
    secret.real_count = real_count;

    BlindedQuery q;
    q.elements.reserve(secret.keywords.size());
    for (const auto& kw : secret.keywords)
        q.elements.push_back(crypto::hash_to_group(view(kw), c).pow(secret.c, c));
    return {std::move(q), std::move(secret)};
}

ReplyElements reply(const BlindedQuery& query, const ServerKey& key, CostCounters* c) {
    ReplyElements r;
    r.elements.reserve(query.elements.size());
    for (const auto& e : query.elements) r.elements.push_back(e.pow(key.s, c));
    return r;
}

namespace {

template <typename Contains>
ProcessResult process_impl(const ReplyElements& reply, const QuerySecret& secret,
                           uint64_t doc_count, Contains&& contains, CostCounters* c) {
    if (reply.elements.size() != secret.keywords.size())
        throw std::invalid_argument("process: reply length does not match query secret");
    crypto::Scalar c_inv = secret.c.invert(c);
    std::vector<crypto::GroupElement> pretags;
    pretags.reserve(reply.elements.size());
    for (const auto& e : reply.elements) pretags.push_back(e.pow(c_inv, c));

    ProcessResult res;
    res.per_doc.assign(doc_count, 0);
    for (uint64_t d = 1; d <= doc_count; ++d) {
        for (size_t i = 0; i < pretags.size(); ++i) {
            Tag t = make_tag(d, pretags[i], c);
            if (i < secret.real_count && contains(t)) res.per_doc[d - 1]++;
        }
    }
    for (uint64_t v : res.per_doc)
        if (v == secret.real_count) res.match_count++;
    return res;
}

}  // namespace

ProcessResult process(const ReplyElements& reply, const QuerySecret& secret,
                      const TagCollection& tc, CostCounters* c) {
    return process_impl(reply, secret, tc.doc_count,
                        [&tc](const Tag& t) { return tc.contains(t); }, c);
}

ProcessResult process_filtered(const ReplyElements& reply, const QuerySecret& secret,
                               const cuckoo::Filter& cf, uint64_t doc_count,
                               CostCounters* c) {
    return process_impl(
        reply, secret, doc_count,
        [&cf](const Tag& t) { return cf.contains(ByteView(t.data(), t.size())); }, c);
}

// ---------------------------------------------------------------------------
// Baselines

MultiSetResult vanilla_psi(const std::vector<Keyword>& client, const Corpus& corpus,
                           Rng& rng, CostCounters* client_cost,
                           CostCounters* server_cost) {
    corpus.validate();
    MultiSetResult out;
    out.intersections.resize(corpus.docs.size());
    for (size_t d = 0; d < corpus.docs.size(); ++d) {
        // fresh keys and a fresh tag collection per execution
        crypto::Scalar s = crypto::Scalar::random(rng);
        crypto::Scalar cb = crypto::Scalar::random(rng);
        std::vector<crypto::GroupElement> blinded;
        blinded.reserve(client.size());
        for (const auto& kw : client)
            blinded.push_back(crypto::hash_to_group(view(kw), client_cost).pow(cb, client_cost));
        std::vector<crypto::GroupElement> replied;
        replied.reserve(blinded.size());
        for (const auto& e : blinded) replied.push_back(e.pow(s, server_cost));
        std::set<Tag> tc;
        for (const auto& kw : corpus.docs[d]) {
            auto pt = crypto::hash_to_group(view(kw), server_cost).pow(s, server_cost);
            tc.insert(cpsi_tag(pt, server_cost));
        }
        crypto::Scalar cb_inv = cb.invert(client_cost);
        for (size_t i = 0; i < replied.size(); ++i) {
            Tag t = cpsi_tag(replied[i].pow(cb_inv, client_cost), client_cost);
            if (tc.count(t)) out.intersections[d].push_back(client[i]);
        }
    }
    return out;
}

Tag cpsi_tag(const crypto::GroupElement& pretag, CostCounters* c) {
    auto d = crypto::hash_bytes("tag-flat", {pretag.bytes()});
    if (c) c->tag_hash++;
    Tag t;
    std::memcpy(t.data(), d.data(), kTagSize);
    return t;
}

CpsiTagSets cpsi_precompute(const Corpus& corpus, const ServerKey& key, CostCounters* c) {
    corpus.validate();
    CpsiTagSets out;
    out.per_set.resize(corpus.docs.size());
    for (size_t d = 0; d < corpus.docs.size(); ++d) {
        for (const auto& kw : corpus.docs[d]) {
            auto pt = crypto::hash_to_group(view(kw), c).pow(key.s, c);
            out.per_set[d].push_back(cpsi_tag(pt, c));
        }
        std::sort(out.per_set[d].begin(), out.per_set[d].end());
    }
    return out;
}

MultiSetResult cpsi_online(const std::vector<Keyword>& client, const CpsiTagSets& tags,
                           const ServerKey& key, Rng& rng, CostCounters* client_cost,
                           CostCounters* server_cost) {
    MultiSetResult out;
    out.intersections.resize(tags.per_set.size());
    // the single-set protocol is run once per server set
    for (size_t d = 0; d < tags.per_set.size(); ++d) {
        crypto::Scalar cb = crypto::Scalar::random(rng);
        std::vector<crypto::GroupElement> blinded;
        blinded.reserve(client.size());
        for (const auto& kw : client)
            blinded.push_back(crypto::hash_to_group(view(kw), client_cost).pow(cb, client_cost));
        std::vector<crypto::GroupElement> replied;
        replied.reserve(blinded.size());
        for (const auto& e : blinded) replied.push_back(e.pow(key.s, server_cost));
        crypto::Scalar cb_inv = cb.invert(client_cost);
        for (size_t i = 0; i < replied.size(); ++i) {
            Tag t = cpsi_tag(replied[i].pow(cb_inv, client_cost), client_cost);
            if (std::binary_search(tags.per_set[d].begin(), tags.per_set[d].end(), t))
                out.intersections[d].push_back(client[i]);
        }
    }
    return out;
}

std::vector<uint64_t> intersection_sizes_oracle(const std::vector<Keyword>& client,
                                                const Corpus& corpus) {
    std::vector<uint64_t> sizes(corpus.docs.size(), 0);
    for (size_t d = 0; d < corpus.docs.size(); ++d) {
        std::set<Keyword> doc(corpus.docs[d].begin(), corpus.docs[d].end());
        for (const auto& kw : client)
            if (doc.count(kw)) sizes[d]++;
    }
    return sizes;
}

}  // namespace psinet::mspsi
