#include "psinet/runtime.hpp"

#include <chrono>

namespace psinet {

int64_t SystemClock::now_ms() const {
    using namespace std::chrono;
    return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

TimerId SimRuntime::schedule_at(int64_t when_ms, std::function<void()> fn) {
    if (when_ms < now_) when_ms = now_;
    uint64_t id = next_seq_++;
    heap_.push(Ev{when_ms, id});
    fns_[id] = std::move(fn);
    return id;
}

void SimRuntime::cancel(TimerId id) { fns_.erase(id); }

bool SimRuntime::step() {
    while (!heap_.empty()) {
        Ev ev = heap_.top();
        heap_.pop();
        auto it = fns_.find(ev.seq);
        if (it == fns_.end()) continue;  // canceled
        std::function<void()> fn = std::move(it->second);
        fns_.erase(it);
        now_ = ev.t;
        fn();
        return true;
    }
    return false;
}

void SimRuntime::run_until(int64_t until_ms) {
    while (!heap_.empty() && heap_.top().t <= until_ms) {
        if (!fns_.count(heap_.top().seq)) {
            heap_.pop();
            continue;
        }
        step();
    }
    if (now_ < until_ms) now_ = until_ms;
}

void SimRuntime::run_all(uint64_t max_events) {
    uint64_t n = 0;
    while (n < max_events && step()) n++;
}

RealRuntime::RealRuntime() : worker_([this] { loop(); }) {}

RealRuntime::~RealRuntime() { stop(); }

int64_t RealRuntime::now_ms() const {
    using namespace std::chrono;
    return duration_cast<milliseconds>(steady_clock::now().time_since_epoch()).count();
}

TimerId RealRuntime::schedule_at(int64_t when_ms, std::function<void()> fn) {
    std::lock_guard lk(mu_);
    uint64_t id = next_seq_++;
    timers_[{when_ms, id}] = std::move(fn);
    when_[id] = when_ms;
    cv_.notify_all();
    return id;
}

void RealRuntime::cancel(TimerId id) {
    std::lock_guard lk(mu_);
    auto it = when_.find(id);
    if (it == when_.end()) return;
    timers_.erase({it->second, id});
    when_.erase(it);
}

void RealRuntime::stop() {
    {
        std::lock_guard lk(mu_);
        if (stopping_) return;
        stopping_ = true;
        cv_.notify_all();
    }
    if (worker_.joinable()) worker_.join();
}

void RealRuntime::loop() {
    std::unique_lock lk(mu_);
    while (!stopping_) {
        if (timers_.empty()) {
            cv_.wait(lk);
            continue;
        }
        auto first = timers_.begin();
        int64_t due = first->first.first;
        int64_t now = now_ms();
        if (due > now) {
            cv_.wait_for(lk, std::chrono::milliseconds(due - now));
            continue;
        }
        std::function<void()> fn = std::move(first->second);
        when_.erase(first->first.second);
        timers_.erase(first);
        lk.unlock();
        fn();
        lk.lock();
    }
}

}  // namespace psinet
