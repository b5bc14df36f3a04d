#pragma once

#include <atomic>
#include <string>
#include <thread>
#include <vector>

#include "psinet/server_client.hpp"

namespace psinet::ph {

/// Serves the framed wire protocol over TCP, one thread per connection.
/// The wire carries no caller identity; transport anonymity is assumed to
/// come from the layer below.
class TcpServer {
public:
    TcpServer(ServerCore& core, const std::string& bind_host, uint16_t port);
    ~TcpServer();

    uint16_t port() const { return port_; }
    void stop();

private:
    void accept_loop();
    void serve(int fd);

    ServerCore& core_;
    int listen_fd_ = -1;
    uint16_t port_ = 0;
    std::atomic<bool> stopping_{false};
    std::thread acceptor_;
    std::mutex conn_mu_;
    std::vector<std::thread> conns_;
};

/// Blocking client over TCP: one short-lived connection per request plus a
/// persistent monitor stream whose frames are posted onto the runtime.
class TcpClient : public ServerClient {
public:
    TcpClient(std::string host, uint16_t port, Runtime& rt);
    ~TcpClient() override;

    uint64_t bb_broadcast(Bytes payload) override;
    std::vector<BulletinEntry> bb_read(uint64_t after_seq) override;
    PutResult ph_put(const Addr& addr, Bytes ciphertext) override;
    std::optional<Bytes> ph_get(const Addr& addr) override;
    void monitor_start(int64_t last_online_ms, MonitorHooks hooks) override;
    void monitor_stop() override;

private:
    int connect_fd() const;
    Bytes request(const Bytes& frame, uint8_t expect_op) const;
    void monitor_loop(int fd, std::shared_ptr<MonitorHooks> hooks);

    std::string host_;
    uint16_t port_;
    Runtime& rt_;
    std::atomic<bool> monitor_stop_{false};
    int monitor_fd_ = -1;
    std::thread monitor_thread_;
};

}  // namespace psinet::ph
