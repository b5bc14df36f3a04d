#include "psinet/server_core.hpp"

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace psinet::ph {

namespace {
// bucket=4, 17 fingerprint bits: FPR ~ 8/2^17 ~ 6e-5, under the 0.01% target.
// False positives here only cost the receiver one probe.
cuckoo::Params bulk_filter_params(uint64_t n) {
    cuckoo::Params p;
    p.bucket_size = 4;
    p.fingerprint_bits = 17;
    p.capacity = n < 16 ? 16 : n;
    return p;
}
}  // namespace

ServerCore::ServerCore(Config config, const Clock& clock)
    : config_(std::move(config)), clock_(clock) {
    if (!config_.data_dir.empty()) {
        std::filesystem::create_directories(config_.data_dir);
        load();
    }
}

uint64_t ServerCore::broadcast(Bytes payload) {
    if (payload.size() > config_.max_broadcast_bytes)
        throw std::length_error("broadcast: payload exceeds maximum size");
    std::lock_guard lk(mu_);
    BulletinEntry e{next_seq_++, clock_.now_ms(), std::move(payload)};
    persist_broadcast(e);  // durable before acknowledgment
    bulletin_.push_back(std::move(e));
    return bulletin_.back().seq;
}

std::vector<BulletinEntry> ServerCore::read_after(uint64_t after_seq) const {
    std::lock_guard lk(mu_);
    std::vector<BulletinEntry> out;
    int64_t cutoff = clock_.now_ms() - config_.bulletin_retention_ms;
    for (const auto& e : bulletin_) {
        if (e.seq > after_seq && e.posted_at_ms >= cutoff) out.push_back(e);
    }
    return out;
}

uint64_t ServerCore::latest_seq() const {
    std::lock_guard lk(mu_);
    return next_seq_ - 1;
}

PutResult ServerCore::put(const Addr& addr, Bytes ciphertext) {
    if (ciphertext.size() != config_.envelope_bytes) return PutResult::bad_length;
    std::vector<PrefixFn> fns;
    {
        std::lock_guard lk(mu_);
        int64_t now = clock_.now_ms();
        auto it = mailboxes_.find(addr);
        if (it != mailboxes_.end()) {
            // one-time-use: never overwrite, even when the tenant is expired
            // but not yet swept
            return PutResult::collision;
        }
        Mailbox mb{std::move(ciphertext), now};
        persist_put(addr, mb);
        mailboxes_.emplace(addr, std::move(mb));
        put_order_.emplace_back(now, addr);
        total_puts_++;
        fns.reserve(monitors_.size());
        for (const auto& [id, fn] : monitors_) fns.push_back(fn);
    }
    uint16_t prefix = addr_prefix(addr);
    for (const auto& fn : fns) fn(prefix);
    return PutResult::ok;
}

std::optional<Bytes> ServerCore::get(const Addr& addr) const {
    std::lock_guard lk(mu_);
    auto it = mailboxes_.find(addr);
    if (it == mailboxes_.end()) return std::nullopt;
    if (it->second.posted_at_ms + config_.retention_ms <= clock_.now_ms())
        return std::nullopt;  // expired but not yet swept
    return it->second.ciphertext;
}

uint64_t ServerCore::add_monitor(PrefixFn fn) {
    std::lock_guard lk(mu_);
    uint64_t id = next_monitor_++;
    monitors_[id] = std::move(fn);
    return id;
}

void ServerCore::remove_monitor(uint64_t id) {
    std::lock_guard lk(mu_);
    monitors_.erase(id);
}

Bytes ServerCore::bulk_filter(int64_t since_ms) const {
    std::vector<Bytes> addrs;
    {
        std::lock_guard lk(mu_);
        for (auto it = put_order_.rbegin(); it != put_order_.rend(); ++it) {
            if (it->first < since_ms) break;
            addrs.emplace_back(it->second.begin(), it->second.end());
        }
    }
    uint64_t seed = 0x636f7665u ^ addrs.size();
    return cuckoo::Filter::build(addrs, bulk_filter_params(addrs.size()), seed).serialize();
}

void ServerCore::prune() {
    std::lock_guard lk(mu_);
    int64_t now = clock_.now_ms();
    while (!put_order_.empty() && put_order_.front().first + config_.retention_ms <= now) {
        mailboxes_.erase(put_order_.front().second);
        put_order_.pop_front();
    }
    int64_t bb_cutoff = now - config_.bulletin_retention_ms;
    while (!bulletin_.empty() && bulletin_.front().posted_at_ms < bb_cutoff)
        bulletin_.pop_front();
}

uint64_t ServerCore::stored_envelope_bytes() const {
    std::lock_guard lk(mu_);
    uint64_t total = 0;
    int64_t now = clock_.now_ms();
    for (const auto& [t, addr] : put_order_) {
        if (t + config_.retention_ms > now) total += 32 + 8 + config_.envelope_bytes;
    }
    return total;
}

size_t ServerCore::mailbox_count() const {
    std::lock_guard lk(mu_);
    return mailboxes_.size();
}

// Append-only persistence: one record per line event, flushed before the
// operation is acknowledged. Records past retention are dropped on load.
void ServerCore::persist_broadcast(const BulletinEntry& e) {
    if (config_.data_dir.empty()) return;
    std::ofstream f(std::filesystem::path(config_.data_dir) / "bulletin.log",
                    std::ios::app | std::ios::binary);
    Bytes rec;
    put_u64be(rec, e.seq);
    put_u64be(rec, static_cast<uint64_t>(e.posted_at_ms));
    put_u32be(rec, static_cast<uint32_t>(e.payload.size()));
    append(rec, view(e.payload));
    f.write(reinterpret_cast<const char*>(rec.data()), rec.size());
    f.flush();
}

void ServerCore::persist_put(const Addr& addr, const Mailbox& mb) {
    if (config_.data_dir.empty()) return;
    std::ofstream f(std::filesystem::path(config_.data_dir) / "mailboxes.log",
                    std::ios::app | std::ios::binary);
    Bytes rec;
    append(rec, ByteView(addr.data(), addr.size()));
    put_u64be(rec, static_cast<uint64_t>(mb.posted_at_ms));
    put_u32be(rec, static_cast<uint32_t>(mb.ciphertext.size()));
    append(rec, view(mb.ciphertext));
    f.write(reinterpret_cast<const char*>(rec.data()), rec.size());
    f.flush();
}

void ServerCore::load() {
    namespace fs = std::filesystem;
    int64_t now = clock_.now_ms();
    auto bb_path = fs::path(config_.data_dir) / "bulletin.log";
    if (fs::exists(bb_path)) {
        std::ifstream f(bb_path, std::ios::binary);
        Bytes data((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
        size_t off = 0;
        while (off + 20 <= data.size()) {
            BulletinEntry e;
            e.seq = get_u64be(data.data() + off);
            e.posted_at_ms = static_cast<int64_t>(get_u64be(data.data() + off + 8));
            uint32_t len = get_u32be(data.data() + off + 16);
            if (off + 20 + len > data.size()) break;  // truncated tail record
            e.payload.assign(data.begin() + off + 20, data.begin() + off + 20 + len);
            off += 20 + len;
            if (e.posted_at_ms + config_.bulletin_retention_ms > now) {
                next_seq_ = e.seq + 1;
                bulletin_.push_back(std::move(e));
            } else if (e.seq >= next_seq_) {
                next_seq_ = e.seq + 1;
            }
        }
    }
    auto mb_path = fs::path(config_.data_dir) / "mailboxes.log";
    if (fs::exists(mb_path)) {
        std::ifstream f(mb_path, std::ios::binary);
        Bytes data((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
        size_t off = 0;
        while (off + 44 <= data.size()) {
            Addr addr;
            std::memcpy(addr.data(), data.data() + off, 32);
            int64_t t = static_cast<int64_t>(get_u64be(data.data() + off + 32));
            uint32_t len = get_u32be(data.data() + off + 40);
            if (off + 44 + len > data.size()) break;
            Bytes ct(data.begin() + off + 44, data.begin() + off + 44 + len);
            off += 44 + len;
            total_puts_++;
            if (t + config_.retention_ms > now && !mailboxes_.count(addr)) {
                mailboxes_.emplace(addr, Mailbox{std::move(ct), t});
                put_order_.emplace_back(t, addr);
            }
        }
        std::sort(put_order_.begin(), put_order_.end());
    }
}

}  // namespace psinet::ph
