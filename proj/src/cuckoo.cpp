#include "psinet/cuckoo.hpp"

#include <cstring>

#include "psinet/crypto.hpp"

namespace psinet::cuckoo {

namespace {

constexpr char kMagic[3] = {'C', 'F', '1'};

uint64_t next_pow2(uint64_t v) {
    uint64_t p = 1;
    while (p < v) p <<= 1;
    return p;
}

}  // namespace

/// splitmix64 for eviction choices; seeded from the filter's own seed.
class InsertRng {
public:
    explicit InsertRng(uint64_t seed) : state_(seed ^ 0x9e3779b97f4a7c15ull) {}
    uint64_t next() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

private:
    uint64_t state_;
};

Filter::Slot Filter::locate(ByteView item) const {
    auto seed_bytes = u64be_bytes(seed_);
    auto d = crypto::hash_bytes("cuckoo-item", {ByteView(seed_bytes.data(), 8), item});
    uint32_t mask = params_.fingerprint_bits >= 32
                        ? 0xffffffffu
                        : ((uint32_t(1) << params_.fingerprint_bits) - 1);
    uint32_t fp = get_u32be(d.data()) & mask;
    if (fp == 0) fp = 1;  // 0 marks an empty slot
    uint64_t i1 = get_u64be(d.data() + 8) & (bucket_count_ - 1);
    return Slot{fp, i1, alt_index(i1, fp)};
}

uint64_t Filter::alt_index(uint64_t index, uint32_t fp) const {
    uint8_t fpb[4];
    for (int i = 0; i < 4; ++i) fpb[i] = static_cast<uint8_t>(fp >> (8 * i));
    auto d = crypto::hash_bytes("cuckoo-alt", {ByteView(fpb, 4)});
    return (index ^ get_u64be(d.data())) & (bucket_count_ - 1);
}

bool Filter::insert(uint32_t fp, uint64_t i1, InsertRng& rng) {
    uint64_t i2 = alt_index(i1, fp);
    for (uint64_t idx : {i1, i2}) {
        uint32_t* bucket = &slots_[idx * params_.bucket_size];
        for (uint32_t s = 0; s < params_.bucket_size; ++s) {
            if (bucket[s] == 0) {
                bucket[s] = fp;
                return true;
            }
        }
    }
    uint64_t idx = (rng.next() & 1) ? i1 : i2;
    uint32_t cur = fp;
    for (uint32_t n = 0; n < params_.max_evictions; ++n) {
        uint32_t victim = static_cast<uint32_t>(rng.next() % params_.bucket_size);
        uint32_t* bucket = &slots_[idx * params_.bucket_size];
        std::swap(cur, bucket[victim]);
        idx = alt_index(idx, cur);
        bucket = &slots_[idx * params_.bucket_size];
        for (uint32_t s = 0; s < params_.bucket_size; ++s) {
            if (bucket[s] == 0) {
                bucket[s] = cur;
                return true;
            }
        }
    }
    return false;
}

Filter Filter::build(const std::vector<ByteView>& items, Params params, uint64_t seed) {
    if (params.bucket_size == 0 || params.bucket_size > 8)
        throw std::invalid_argument("cuckoo: bucket_size must be 1..8");
    if (params.fingerprint_bits < 8 || params.fingerprint_bits > 32)
        throw std::invalid_argument("cuckoo: fingerprint_bits must be 8..32");
    if (params.capacity == 0) params.capacity = 1;

    Filter f;
    f.params_ = params;
    f.seed_ = seed;
    uint64_t need = static_cast<uint64_t>(
        double(params.capacity) / (params.load_limit * params.bucket_size) + 1);
    f.bucket_count_ = next_pow2(need < 2 ? 2 : need);
    f.slots_.assign(f.bucket_count_ * params.bucket_size, 0);

    InsertRng rng(seed);
    for (const auto& item : items) {
        Slot s = f.locate(item);
        if (!f.insert(s.fp, s.i1, rng)) throw CapacityError();
        f.count_++;
    }
    return f;
}

Filter Filter::build(const std::vector<Bytes>& items, Params params, uint64_t seed) {
    std::vector<ByteView> views;
    views.reserve(items.size());
    for (const auto& i : items) views.push_back(view(i));
    return build(views, params, seed);
}

bool Filter::contains(ByteView item) const {
    Slot s = locate(item);
    for (uint64_t idx : {s.i1, s.i2}) {
        const uint32_t* bucket = &slots_[idx * params_.bucket_size];
        for (uint32_t i = 0; i < params_.bucket_size; ++i)
            if (bucket[i] == s.fp) return true;
    }
    return false;
}

std::vector<size_t> Filter::intersect(const std::vector<ByteView>& probes) const {
    std::vector<size_t> hits;
    for (size_t i = 0; i < probes.size(); ++i)
        if (contains(probes[i])) hits.push_back(i);
    return hits;
}

Bytes Filter::serialize() const {
    Bytes out;
    out.reserve(32 + (slots_.size() * params_.fingerprint_bits + 7) / 8);
    append(out, ByteView(reinterpret_cast<const uint8_t*>(kMagic), 3));
    out.push_back(static_cast<uint8_t>(params_.bucket_size));
    out.push_back(static_cast<uint8_t>(params_.fingerprint_bits));
    put_u64be(out, params_.capacity);
    put_u32be(out, params_.max_evictions);
    put_u64be(out, count_);
    put_u64be(out, seed_);
    put_u64be(out, bucket_count_);
    // bit-packed fingerprints, little-endian bit order within the stream
    uint64_t acc = 0;
    uint32_t nbits = 0;
    for (uint32_t slot : slots_) {
        acc |= uint64_t(slot) << nbits;
        nbits += params_.fingerprint_bits;
        while (nbits >= 8) {
            out.push_back(static_cast<uint8_t>(acc & 0xff));
            acc >>= 8;
            nbits -= 8;
        }
    }
    if (nbits > 0) out.push_back(static_cast<uint8_t>(acc & 0xff));
    return out;
}

std::optional<Filter> Filter::deserialize(ByteView b) {
    if (b.size() < 3 + 2 + 8 + 4 + 8 + 8 + 8) return std::nullopt;
    if (std::memcmp(b.data(), kMagic, 3) != 0) return std::nullopt;
    Filter f;
    size_t off = 3;
    f.params_.bucket_size = b[off++];
    f.params_.fingerprint_bits = b[off++];
    if (f.params_.bucket_size == 0 || f.params_.bucket_size > 8) return std::nullopt;
    if (f.params_.fingerprint_bits < 8 || f.params_.fingerprint_bits > 32) return std::nullopt;
    f.params_.capacity = get_u64be(b.data() + off); off += 8;
    f.params_.max_evictions = get_u32be(b.data() + off); off += 4;
    f.count_ = get_u64be(b.data() + off); off += 8;
    f.seed_ = get_u64be(b.data() + off); off += 8;
    f.bucket_count_ = get_u64be(b.data() + off); off += 8;
    if (f.bucket_count_ == 0 || (f.bucket_count_ & (f.bucket_count_ - 1)) != 0)
        return std::nullopt;
    uint64_t nslots = f.bucket_count_ * f.params_.bucket_size;
    if (nslots > (uint64_t(1) << 32)) return std::nullopt;
    uint64_t nbytes = (nslots * f.params_.fingerprint_bits + 7) / 8;
    if (b.size() != off + nbytes) return std::nullopt;
    f.slots_.resize(nslots);
    uint64_t acc = 0;
    uint32_t nbits = 0;
    size_t pos = off;
    uint32_t mask = f.params_.fingerprint_bits >= 32
                        ? 0xffffffffu
                        : ((uint32_t(1) << f.params_.fingerprint_bits) - 1);
    for (uint64_t i = 0; i < nslots; ++i) {
        while (nbits < f.params_.fingerprint_bits) {
            acc |= uint64_t(b[pos++]) << nbits;
            nbits += 8;
        }
        f.slots_[i] = static_cast<uint32_t>(acc & mask);
        acc >>= f.params_.fingerprint_bits;
        nbits -= f.params_.fingerprint_bits;
    }
    return f;
}

}  // namespace psinet::cuckoo
