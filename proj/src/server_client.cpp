#include "psinet/server_client.hpp"

namespace psinet::ph {

void InProcessClient::monitor_start(int64_t last_online_ms, MonitorHooks hooks) {
    monitor_stop();
    hooks_ = std::make_shared<MonitorHooks>(std::move(hooks));
    Bytes bulk = core_.bulk_filter(last_online_ms);
    auto hooks_ptr = hooks_;
    Runtime& rt = rt_;
    rt_.post([hooks_ptr, bulk = std::move(bulk)]() mutable {
        if (hooks_ptr->on_bulk) hooks_ptr->on_bulk(std::move(bulk));
    });
    monitor_id_ = core_.add_monitor([&rt, hooks_ptr](uint16_t prefix) {
        rt.post([hooks_ptr, prefix] {
            if (hooks_ptr->on_prefix) hooks_ptr->on_prefix(prefix);
        });
    });
}

void InProcessClient::monitor_stop() {
    if (monitor_id_ != 0) {
        core_.remove_monitor(monitor_id_);
        monitor_id_ = 0;
    }
    hooks_.reset();
}

}  // namespace psinet::ph
