#pragma once

#include <cstdint>

namespace psinet {

/// Instrumentation counters for the cost accounting of the PSI variants.
/// Group exponentiations, hash-to-group evaluations and tag hashes are
/// counted separately; the cost tables treat an "exp-hash" as one of each.
struct CostCounters {
    uint64_t group_exp = 0;      // scalar * element
    uint64_t hash_to_group = 0;  // keyword -> group element
    uint64_t tag_hash = 0;       // digest computations producing tags
    uint64_t scalar_invert = 0;
    uint64_t dh = 0;
    uint64_t ae_encrypt = 0;
    uint64_t ae_decrypt = 0;

    CostCounters& operator+=(const CostCounters& o) {
        group_exp += o.group_exp;
        hash_to_group += o.hash_to_group;
        tag_hash += o.tag_hash;
        scalar_invert += o.scalar_invert;
        dh += o.dh;
        ae_encrypt += o.ae_encrypt;
        ae_decrypt += o.ae_decrypt;
        return *this;
    }
};

}  // namespace psinet
