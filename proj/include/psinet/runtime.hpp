#pragma once

#include <condition_variable>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <queue>
#include <thread>
#include <unordered_map>

#include "psinet/clock.hpp"

namespace psinet {

using TimerId = uint64_t;

/// Timer scheduling abstraction the messaging and node logic is written
/// against. Deadlines are absolute, so a blocked network call never makes
/// later timers drift.
class Runtime : public Clock {
public:
    virtual TimerId schedule_at(int64_t when_ms, std::function<void()> fn) = 0;
    virtual void cancel(TimerId id) = 0;
    /// Thread-safe enqueue; runs as soon as possible in timestamp order.
    virtual void post(std::function<void()> fn) = 0;

    TimerId schedule_after(int64_t delay_ms, std::function<void()> fn) {
        if (delay_ms < 0) delay_ms = 0;
        return schedule_at(now_ms() + delay_ms, std::move(fn));
    }
};

/// Deterministic single-threaded event loop over a virtual clock. Events at
/// equal times run in scheduling order (time, tiebreak sequence).
class SimRuntime : public Runtime {
public:
    explicit SimRuntime(int64_t start_ms = 0) : now_(start_ms) {}

    int64_t now_ms() const override { return now_; }
    TimerId schedule_at(int64_t when_ms, std::function<void()> fn) override;
    void cancel(TimerId id) override;
    void post(std::function<void()> fn) override { schedule_at(now_, std::move(fn)); }

    /// Runs every event with timestamp <= until_ms; leaves now at until_ms.
    void run_until(int64_t until_ms);
    /// Runs everything in the queue (use with care: feedback loops never drain).
    void run_all(uint64_t max_events = UINT64_MAX);
    bool step();  // one event; false if queue empty
    size_t pending() const { return fns_.size(); }

private:
    struct Ev {
        int64_t t;
        uint64_t seq;
        bool operator>(const Ev& o) const { return t != o.t ? t > o.t : seq > o.seq; }
    };
    int64_t now_;
    uint64_t next_seq_ = 1;
    std::priority_queue<Ev, std::vector<Ev>, std::greater<Ev>> heap_;
    std::unordered_map<uint64_t, std::function<void()>> fns_;  // absent = canceled
};

/// Wall-clock runtime: one worker thread executing due timers. schedule/cancel
/// and post are callable from any thread, including from timer callbacks.
class RealRuntime : public Runtime {
public:
    RealRuntime();
    ~RealRuntime() override;

    int64_t now_ms() const override;
    TimerId schedule_at(int64_t when_ms, std::function<void()> fn) override;
    void cancel(TimerId id) override;
    void post(std::function<void()> fn) override { schedule_at(now_ms(), std::move(fn)); }

    void stop();

private:
    void loop();
    mutable std::mutex mu_;
    std::condition_variable cv_;
    std::map<std::pair<int64_t, uint64_t>, std::function<void()>> timers_;
    std::unordered_map<uint64_t, int64_t> when_;  // id -> scheduled time
    uint64_t next_seq_ = 1;
    bool stopping_ = false;
    std::thread worker_;
};

}  // namespace psinet
