#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "psinet/bytes.hpp"

namespace psinet::cuckoo {

struct CapacityError : std::runtime_error {
    CapacityError() : std::runtime_error("cuckoo filter: insertion failed, re-parameterize") {}
};

struct Params {
    uint32_t bucket_size = 4;
    uint32_t fingerprint_bits = 24;  // 4-slot buckets at 24 bits: FPR ~ 8 / 2^24
    uint64_t capacity = 0;           // expected number of elements
    uint32_t max_evictions = 500;
    double load_limit = 0.95;

    double target_fpr() const {
        return 2.0 * bucket_size / double(uint64_t(1) << fingerprint_bits);
    }
};

/// Partial-key cuckoo filter. Zero false negatives for inserted elements;
/// false-positive rate set by the fingerprint width and bucket size.
/// A built filter is immutable and freely shareable across threads.
class Filter {
public:
    /// CF.compress: build from a set of byte strings. Eviction order is
    /// driven by the seed, so identical input and seed give identical bytes.
    static Filter build(const std::vector<ByteView>& items, Params params, uint64_t seed);
    static Filter build(const std::vector<Bytes>& items, Params params, uint64_t seed);

    /// CF.membership.
    bool contains(ByteView item) const;

    /// CF.intersection: indices of the membership-positive probes, probe
    /// order preserved.
    std::vector<size_t> intersect(const std::vector<ByteView>& probes) const;

    Bytes serialize() const;  // canonical: header + bit-packed buckets, LE
    static std::optional<Filter> deserialize(ByteView b);

    uint64_t count() const { return count_; }
    uint64_t bucket_count() const { return bucket_count_; }
    const Params& params() const { return params_; }
    uint64_t seed() const { return seed_; }

    bool operator==(const Filter& o) const {
        return params_.bucket_size == o.params_.bucket_size &&
               params_.fingerprint_bits == o.params_.fingerprint_bits &&
               params_.capacity == o.params_.capacity &&
               params_.max_evictions == o.params_.max_evictions &&
               bucket_count_ == o.bucket_count_ && count_ == o.count_ &&
               seed_ == o.seed_ && slots_ == o.slots_;
    }

private:
    Filter() = default;
    Params params_;
    uint64_t seed_ = 0;
    uint64_t bucket_count_ = 0;  // power of two
    uint64_t count_ = 0;
    std::vector<uint32_t> slots_;  // bucket-major, 0 = empty

    struct Slot {
        uint32_t fp;
        uint64_t i1;
        uint64_t i2;
    };
    Slot locate(ByteView item) const;
    uint64_t alt_index(uint64_t index, uint32_t fp) const;
    bool insert(uint32_t fp, uint64_t i1, class InsertRng& rng);
};

}  // namespace psinet::cuckoo
