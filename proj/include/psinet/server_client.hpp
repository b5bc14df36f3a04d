#pragma once

#include <functional>
#include <memory>
#include <optional>

#include "psinet/runtime.hpp"
#include "psinet/server_core.hpp"

namespace psinet::ph {

/// Per-journalist traffic ledger, in wire bytes. The "model" total is the
/// documented accounting: envelopes both directions, notification bytes and
/// cover-key broadcasts, frame overhead included. Probe misses and
/// search-related broadcasts are tracked separately.
struct TrafficLedger {
    uint64_t env_sent_bytes = 0, env_sent_count = 0;
    uint64_t env_recv_bytes = 0, env_recv_count = 0;
    uint64_t probe_miss_bytes = 0, probe_miss_count = 0;
    uint64_t feed_bytes = 0, feed_count = 0;
    uint64_t bulk_bytes = 0;
    uint64_t key_sent_bytes = 0, key_recv_bytes = 0;
    uint64_t search_bytes = 0;  // record/query broadcasts and reads

    uint64_t model_bytes() const {
        return env_sent_bytes + env_recv_bytes + feed_bytes + bulk_bytes +
               key_sent_bytes + key_recv_bytes;
    }
    uint64_t total_bytes() const {
        return model_bytes() + probe_miss_bytes + search_bytes;
    }
};

struct MonitorHooks {
    std::function<void(Bytes bulk_filter)> on_bulk;
    std::function<void(uint16_t prefix)> on_prefix;
};

/// Client-side view of the communication server. Implementations: in-process
/// (simulation, deterministic) and TCP (the real wire protocol).
class ServerClient {
public:
    virtual ~ServerClient() = default;

    virtual uint64_t bb_broadcast(Bytes payload) = 0;
    virtual std::vector<BulletinEntry> bb_read(uint64_t after_seq) = 0;
    virtual PutResult ph_put(const Addr& addr, Bytes ciphertext) = 0;
    virtual std::optional<Bytes> ph_get(const Addr& addr) = 0;
    virtual void monitor_start(int64_t last_online_ms, MonitorHooks hooks) = 0;
    virtual void monitor_stop() = 0;
};

/// Direct calls into a ServerCore; notifications are delivered as runtime
/// events so simulations stay deterministic.
class InProcessClient : public ServerClient {
public:
    InProcessClient(ServerCore& core, Runtime& rt) : core_(core), rt_(rt) {}
    ~InProcessClient() override { monitor_stop(); }

    uint64_t bb_broadcast(Bytes payload) override { return core_.broadcast(std::move(payload)); }
    std::vector<BulletinEntry> bb_read(uint64_t after_seq) override {
        return core_.read_after(after_seq);
    }
    PutResult ph_put(const Addr& addr, Bytes ct) override {
        return core_.put(addr, std::move(ct));
    }
    std::optional<Bytes> ph_get(const Addr& addr) override { return core_.get(addr); }

    void monitor_start(int64_t last_online_ms, MonitorHooks hooks) override;
    void monitor_stop() override;

private:
    ServerCore& core_;
    Runtime& rt_;
    uint64_t monitor_id_ = 0;
    std::shared_ptr<MonitorHooks> hooks_;
};

}  // namespace psinet::ph
