#pragma once

#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "psinet/bytes.hpp"
#include "psinet/clock.hpp"
#include "psinet/cuckoo.hpp"

namespace psinet::ph {

struct Config {
    int64_t retention_ms = 7 * kDayMs;            // pigeonhole message expiry
    int64_t bulletin_retention_ms = 30 * kDayMs;  // one epoch
    size_t envelope_bytes = 1064;                 // fixed ciphertext length
    size_t max_broadcast_bytes = 1 << 20;
    std::string data_dir;                         // empty = memory only
};

struct BulletinEntry {
    uint64_t seq = 0;
    int64_t posted_at_ms = 0;
    Bytes payload;
};

enum class PutResult { ok, collision, bad_length };

/// Bulletin board plus pigeonhole store. Trusted for availability only: it
/// keeps (addr, ciphertext, time) tuples and broadcast payloads, and none of
/// its operations take a caller identity. Thread-safe.
class ServerCore {
public:
    ServerCore(Config config, const Clock& clock);

    // bulletin board
    uint64_t broadcast(Bytes payload);  // throws std::length_error when oversize
    std::vector<BulletinEntry> read_after(uint64_t after_seq) const;
    uint64_t latest_seq() const;

    // pigeonhole
    PutResult put(const Addr& addr, Bytes ciphertext);
    std::optional<Bytes> get(const Addr& addr) const;

    // monitoring: live feed of 2-byte address prefixes plus a bulk filter
    // covering [since, now] for catching up
    using PrefixFn = std::function<void(uint16_t)>;
    uint64_t add_monitor(PrefixFn fn);
    void remove_monitor(uint64_t id);
    Bytes bulk_filter(int64_t since_ms) const;

    /// Drops expired mailboxes and bulletin entries.
    void prune();

    uint64_t stored_envelope_bytes() const;
    uint64_t total_puts() const { return total_puts_; }
    size_t mailbox_count() const;

    const Config& config() const { return config_; }

private:
    struct Mailbox {
        Bytes ciphertext;
        int64_t posted_at_ms;
    };

    Config config_;
    const Clock& clock_;
    mutable std::mutex mu_;
    uint64_t next_seq_ = 1;
    std::deque<BulletinEntry> bulletin_;
    std::unordered_map<Addr, Mailbox, ArrayHash> mailboxes_;
    std::deque<std::pair<int64_t, Addr>> put_order_;  // for expiry sweeps
    std::map<uint64_t, PrefixFn> monitors_;
    uint64_t next_monitor_ = 1;
    uint64_t total_puts_ = 0;

    void persist_broadcast(const BulletinEntry& e);
    void persist_put(const Addr& addr, const Mailbox& mb);
    void load();
};

inline uint16_t addr_prefix(const Addr& a) { return get_u16be(a.data()); }

}  // namespace psinet::ph
