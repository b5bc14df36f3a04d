#include "doctest.h"
#include "psinet/mspsi.hpp"

#include <set>

using namespace psinet;
using namespace psinet::mspsi;

namespace {

Corpus corpus_of(std::initializer_list<std::initializer_list<const char*>> docs) {
    Corpus c;
    for (const auto& d : docs) {
        std::vector<Keyword> kws;
        for (const char* k : d) kws.push_back(to_bytes(k));
        c.docs.push_back(std::move(kws));
    }
    return c;
}

std::vector<Keyword> kwlist(std::initializer_list<const char*> ks) {
    std::vector<Keyword> v;
    for (const char* k : ks) v.push_back(to_bytes(k));
    return v;
}

}  // namespace

TEST_CASE("precompute: single doc single keyword") {
    DetRng rng(1);
    ServerKey key = ServerKey::generate(rng);
    Corpus c = corpus_of({{"a"}});
    CostCounters cc;
    TagCollection tc = precompute(c, key, &cc);
    CHECK(tc.tags.size() == 1);
    CHECK(tc.doc_count == 1);
    CHECK(tc.total_elements == 1);
    // exactly the tag H(1 || H_G(a)^s)
    auto pretag = crypto::hash_to_group(view(to_bytes("a"))).pow(key.s);
    CHECK(tc.contains(make_tag(1, pretag)));
    CHECK(cc.group_exp == 1);
    CHECK(cc.tag_hash == 1);
}

TEST_CASE("precompute amortizes duplicate keywords across documents") {
    DetRng rng(2);
    ServerKey key = ServerKey::generate(rng);
    Corpus c = corpus_of({{"a"}, {"a"}});
    CostCounters cc;
    TagCollection tc = precompute(c, key, &cc);
    CHECK(tc.tags.size() == 2);      // per-set diversified tags stay distinct
    CHECK(cc.group_exp == 1);        // one pretag exponentiation
    CHECK(cc.hash_to_group == 1);
    CHECK(cc.tag_hash == 2);
}

TEST_CASE("tag diversification separates sets; flat C-PSI tags do not") {
    DetRng rng(3);
    ServerKey key = ServerKey::generate(rng);
    Corpus c = corpus_of({{"shared", "x"}, {"shared", "y"}});

    CpsiTagSets flat = cpsi_precompute(c, key);
    std::set<Tag> set0(flat.per_set[0].begin(), flat.per_set[0].end());
    int common = 0;
    for (const auto& t : flat.per_set[1])
        if (set0.count(t)) common++;
    CHECK(common == 1);  // the shared keyword links the two sets

    // MS-PSI: same corpus, no tag appears twice
    TagCollection tc = precompute(c, key);
    CHECK(tc.tags.size() == 4);
}

TEST_CASE("blind: fresh randomness, duplicate rejection, sizes") {
    DetRng rng(4);
    auto kws = kwlist({"a", "b", "c"});
    auto [q1, s1] = blind(kws, rng);
    auto [q2, s2] = blind(kws, rng);
    CHECK(q1.elements != q2.elements);  // fresh c per call
    CHECK_FALSE(s1.c == s2.c);

    CHECK_THROWS(blind(kwlist({"a", "a"}), rng));
    CHECK_THROWS(blind({}, rng));

    // m=10 query serializes to 4 + 10*32 bytes; elements alone are 320 B
    std::vector<Keyword> ten;
    for (int i = 0; i < 10; ++i) ten.push_back(to_bytes(std::string(1, 'a' + i)));
    auto [q10, s10] = blind(ten, rng);
    CHECK(q10.elements.size() * crypto::kElementSize == 320);
    CHECK(q10.serialize().size() == 4 + 320);
}

TEST_CASE("blinding then unblinding with the same c is the identity") {
    DetRng rng(5);
    auto [q, s] = blind(kwlist({"alpha", "beta"}), rng);
    auto inv = s.c.invert();
    for (size_t i = 0; i < q.elements.size(); ++i) {
        CHECK(q.elements[i].pow(inv) == crypto::hash_to_group(view(s.keywords[i])));
    }
}

TEST_CASE("reply: deterministic, order-preserving, counted") {
    DetRng rng(6);
    ServerKey key = ServerKey::generate(rng);
    std::vector<Keyword> ten;
    for (int i = 0; i < 10; ++i) ten.push_back(to_bytes("kw" + std::to_string(i)));
    auto [q, s] = blind(ten, rng);

    CostCounters sc;
    ReplyElements r1 = reply(q, key, &sc);
    CHECK(sc.group_exp == 10);
    ReplyElements r2 = reply(q, key);
    CHECK(r1.elements == r2.elements);

    ReplyElements r0 = reply(BlindedQuery{}, key);
    CHECK(r0.elements.empty());
}

TEST_CASE("malformed query element rejects the whole query at decode") {
    DetRng rng(7);
    auto [q, s] = blind(kwlist({"a", "b"}), rng);
    Bytes ser = q.serialize();
    REQUIRE(BlindedQuery::deserialize(view(ser)).has_value());
    ser[4 + 7] ^= 0xff;  // corrupt the first element
    // a corrupted ristretto encoding is invalid with overwhelming probability
    auto bad = BlindedQuery::deserialize(view(ser));
    if (bad.has_value()) {
        CHECK(bad->elements.size() == 2);  // astronomically unlikely
    }
    Bytes truncated(ser.begin(), ser.end() - 1);
    CHECK_FALSE(BlindedQuery::deserialize(view(truncated)).has_value());
}

TEST_CASE("process: worked example I = [1,1,2], t = 1") {
    DetRng rng(8);
    ServerKey key = ServerKey::generate(rng);
    Corpus corpus = corpus_of({{"a", "c"}, {"b"}, {"a", "b"}});
    TagCollection tc = precompute(corpus, key);

    auto [q, secret] = blind(kwlist({"a", "b"}), rng);
    ReplyElements r = reply(q, key);
    ProcessResult res = process(r, secret, tc);

    // ground truth from the brute-force oracle
    auto oracle = intersection_sizes_oracle(kwlist({"a", "b"}), corpus);
    CHECK(res.per_doc == oracle);
    CHECK(res.per_doc == std::vector<uint64_t>{1, 1, 2});
    CHECK(res.match_count == 1);
}

TEST_CASE("process: disjoint query matches nothing") {
    DetRng rng(9);
    ServerKey key = ServerKey::generate(rng);
    Corpus corpus = corpus_of({{"a"}, {"b"}});
    TagCollection tc = precompute(corpus, key);
    auto [q, secret] = blind(kwlist({"zz", "qq"}), rng);
    ProcessResult res = process(reply(q, key), secret, tc);
    CHECK(res.per_doc == std::vector<uint64_t>{0, 0});
    CHECK(res.match_count == 0);
}

TEST_CASE("process: counter arithmetic 2m exponentiations, mN tag hashes") {
    DetRng rng(10);
    ServerKey key = ServerKey::generate(rng);
    Corpus corpus;
    for (int d = 0; d < 20; ++d) {
        std::vector<Keyword> kws;
        for (int k = 0; k < 5; ++k)
            kws.push_back(to_bytes("d" + std::to_string(d) + "k" + std::to_string(k)));
        corpus.docs.push_back(kws);
    }
    TagCollection tc = precompute(corpus, key);

    std::vector<Keyword> m5 = kwlist({"d0k0", "d1k1", "x1", "x2", "x3"});
    CostCounters client;
    auto [q, secret] = blind(m5, rng, &client);
    CHECK(client.group_exp == 5);
    ReplyElements r = reply(q, key);
    ProcessResult res = process(r, secret, tc, &client);
    CHECK(client.group_exp == 10);      // m blind + m unblind
    CHECK(client.scalar_invert == 1);
    CHECK(client.tag_hash == 5 * 20);   // m * N
    CHECK(res.per_doc[0] == 1);
    CHECK(res.per_doc[1] == 1);
}

TEST_CASE("process rejects length mismatch") {
    DetRng rng(11);
    ServerKey key = ServerKey::generate(rng);
    Corpus corpus = corpus_of({{"a"}});
    TagCollection tc = precompute(corpus, key);
    auto [q, secret] = blind(kwlist({"a", "b"}), rng);
    ReplyElements r = reply(q, key);
    r.elements.pop_back();
    CHECK_THROWS(process(r, secret, tc));
}

TEST_CASE("padding: only real keywords count toward matches") {
    DetRng rng(12);
    ServerKey key = ServerKey::generate(rng);
    Corpus corpus = corpus_of({{"a", "b"}, {"a"}});
    TagCollection tc = precompute(corpus, key);

    // 2 real keywords, 3 random padding elements
    std::vector<Keyword> padded = kwlist({"a", "b"});
    for (int i = 0; i < 3; ++i) padded.push_back(rng.bytes(32));
    auto [q, secret] = blind(padded, rng, nullptr, 2);
    ProcessResult res = process(reply(q, key), secret, tc);
    CHECK(res.per_doc == std::vector<uint64_t>{2, 1});
    CHECK(res.match_count == 1);  // t compares against real_count, not |Q|
}

TEST_CASE("tag collection serialization: canonical and round-tripping") {
    DetRng rng(13);
    ServerKey key = ServerKey::generate(rng);
    Corpus corpus = corpus_of({{"a", "b", "c"}, {"d", "e"}});
    TagCollection tc = precompute(corpus, key);
    Bytes ser = tc.serialize();
    CHECK(ser.size() == 24 + tc.tags.size() * kTagSize);
    auto back = TagCollection::deserialize(view(ser));
    REQUIRE(back.has_value());
    CHECK(back->tags == tc.tags);
    CHECK(back->doc_count == 2);
    CHECK(back->total_elements == 5);
    CHECK(back->serialize() == ser);
}

TEST_CASE("oracle equivalence on seeded random instances (sampler)") {
    DetRng rng(4242);
    for (int trial = 0; trial < 30; ++trial) {
        size_t universe = 1 + rng.below(100);
        std::vector<Keyword> uni;
        for (size_t i = 0; i < universe; ++i) uni.push_back(to_bytes("u" + std::to_string(i)));

        Corpus corpus;
        size_t n_docs = 1 + rng.below(20);
        for (size_t d = 0; d < n_docs; ++d) {
            size_t n_kw = rng.below(std::min<size_t>(16, universe + 1));
            std::set<size_t> picked;
            while (picked.size() < n_kw) picked.insert(rng.below(universe));
            std::vector<Keyword> kws;
            for (size_t i : picked) kws.push_back(uni[i]);
            corpus.docs.push_back(kws);
        }

        size_t m = 1 + rng.below(10);
        std::set<size_t> qpick;
        while (qpick.size() < std::min(m, universe)) qpick.insert(rng.below(universe));
        std::vector<Keyword> client;
        for (size_t i : qpick) client.push_back(uni[i]);

        ServerKey key = ServerKey::generate(rng);
        TagCollection tc = precompute(corpus, key);
        auto [q, secret] = blind(client, rng);
        ProcessResult res = process(reply(q, key), secret, tc);
        CHECK(res.per_doc == intersection_sizes_oracle(client, corpus));

        // compressed path: no false negatives on these instances
        cuckoo::Params cp;
        cp.capacity = tc.tags.size();
        std::vector<Bytes> items;
        for (const auto& t : tc.tags) items.emplace_back(t.begin(), t.end());
        auto cf = cuckoo::Filter::build(items, cp, 7);
        ProcessResult res2 = process_filtered(reply(q, key), secret, cf, corpus.doc_count());
        for (size_t d = 0; d < corpus.doc_count(); ++d)
            CHECK(res2.per_doc[d] >= res.per_doc[d]);  // only FPs can add
    }
}

TEST_CASE("vanilla PSI on a single set") {
    DetRng rng(14);
    Corpus corpus = corpus_of({{"a", "b"}});
    auto res = vanilla_psi(kwlist({"a"}), corpus, rng);
    REQUIRE(res.intersections.size() == 1);
    CHECK(res.intersections[0] == kwlist({"a"}));
}

TEST_CASE("baseline counters: C-PSI 2mN client exps vs MS-PSI 2m") {
    DetRng rng(15);
    ServerKey key = ServerKey::generate(rng);
    const size_t m = 4, N = 6;
    Corpus corpus;
    for (size_t d = 0; d < N; ++d) {
        std::vector<Keyword> kws;
        for (int k = 0; k < 3; ++k)
            kws.push_back(to_bytes("s" + std::to_string(d) + "-" + std::to_string(k)));
        corpus.docs.push_back(kws);
    }
    std::vector<Keyword> client;
    for (size_t i = 0; i < m; ++i) client.push_back(to_bytes("c" + std::to_string(i)));

    CpsiTagSets tags = cpsi_precompute(corpus, key);
    CostCounters cc, sc;
    cpsi_online(client, tags, key, rng, &cc, &sc);
    CHECK(cc.group_exp == 2 * m * N);
    CHECK(sc.group_exp == m * N);

    CostCounters mc, msc;
    auto [q, secret] = blind(client, rng, &mc);
    auto r = reply(q, key, &msc);
    process(r, secret, precompute(corpus, key), &mc);
    CHECK(mc.group_exp == 2 * m);
    CHECK(msc.group_exp == m);
}
