#include "psinet/tcp.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstring>
#include <stdexcept>

#include "psinet/wire.hpp"

namespace psinet::ph {

namespace {

bool write_all(int fd, const uint8_t* data, size_t n) {
    while (n > 0) {
        ssize_t w = ::send(fd, data, n, MSG_NOSIGNAL);
        if (w <= 0) return false;
        data += w;
        n -= static_cast<size_t>(w);
    }
    return true;
}

bool write_frame(int fd, const Bytes& frame) { return write_all(fd, frame.data(), frame.size()); }

/// Reads one frame; empty optional on EOF/error.
std::optional<wire::Frame> read_frame(int fd, wire::FrameParser& parser) {
    for (;;) {
        if (auto f = parser.next()) return f;
        uint8_t buf[4096];
        ssize_t r = ::recv(fd, buf, sizeof buf, 0);
        if (r <= 0) return std::nullopt;
        parser.feed(ByteView(buf, static_cast<size_t>(r)));
    }
}

Bytes status_frame(uint8_t op, uint8_t status) {
    return wire::FrameWriter(uint8_t(op | wire::kRespBit)).u8(status).finish();
}

Addr to_addr(ByteView b) {
    Addr a{};
    std::memcpy(a.data(), b.data(), 32);
    return a;
}

}  // namespace

// ---------------------------------------------------------------------------
// Server

TcpServer::TcpServer(ServerCore& core, const std::string& bind_host, uint16_t port)
    : core_(core) {
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0) throw std::runtime_error("socket() failed");
    int one = 1;
    setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in sa{};
    sa.sin_family = AF_INET;
    sa.sin_port = htons(port);
    if (inet_pton(AF_INET, bind_host.c_str(), &sa.sin_addr) != 1)
        throw std::runtime_error("bad bind address: " + bind_host);
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&sa), sizeof sa) != 0)
        throw std::runtime_error("bind() failed");
    if (::listen(listen_fd_, 64) != 0) throw std::runtime_error("listen() failed");
    socklen_t len = sizeof sa;
    getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&sa), &len);
    port_ = ntohs(sa.sin_port);
    acceptor_ = std::thread([this] { accept_loop(); });
}

TcpServer::~TcpServer() { stop(); }

void TcpServer::stop() {
    bool expected = false;
    if (!stopping_.compare_exchange_strong(expected, true)) return;
    ::shutdown(listen_fd_, SHUT_RDWR);
    ::close(listen_fd_);
    if (acceptor_.joinable()) acceptor_.join();
    std::lock_guard lk(conn_mu_);
    for (auto& t : conns_)
        if (t.joinable()) t.join();
}

void TcpServer::accept_loop() {
    for (;;) {
        int fd = ::accept(listen_fd_, nullptr, nullptr);
        if (fd < 0) {
            if (stopping_) return;
            continue;
        }
        std::lock_guard lk(conn_mu_);
        conns_.emplace_back([this, fd] { serve(fd); });
    }
}

namespace {
/// Shared between the connection loop and the monitor callback, which can run
/// from any thread doing a put; outlives the connection via shared_ptr.
struct ConnWriter {
    int fd;
    std::mutex mu;
    bool open = true;

    bool write(const Bytes& frame) {
        std::lock_guard lk(mu);
        if (!open) return false;
        return write_all(fd, frame.data(), frame.size());
    }
    void close() {
        std::lock_guard lk(mu);
        open = false;
    }
};
}  // namespace

void TcpServer::serve(int fd) {
    wire::FrameParser parser;
    uint64_t monitor_id = 0;
    auto writer = std::make_shared<ConnWriter>();
    writer->fd = fd;

    for (;;) {
        auto frame = read_frame(fd, parser);
        if (!frame) break;
        wire::FieldReader r(view(frame->body));
        switch (frame->opcode) {
            case wire::kBbBroadcast: {
                auto payload = r.field();
                if (!payload) {
                    write_frame(fd, status_frame(frame->opcode, wire::kBadRequest));
                    break;
                }
                Bytes resp;
                try {
                    uint64_t seq = core_.broadcast(Bytes(payload->begin(), payload->end()));
                    resp = wire::FrameWriter(wire::kBbBroadcast | wire::kRespBit)
                               .u8(wire::kOk)
                               .u64(seq)
                               .finish();
                } catch (const std::length_error&) {
                    resp = status_frame(frame->opcode, wire::kOversize);
                }
                std::lock_guard lk(write_mu);
                write_frame(fd, resp);
                break;
            }
            case wire::kBbRead: {
                auto after = r.u64();
                if (!after) {
                    write_frame(fd, status_frame(frame->opcode, wire::kBadRequest));
                    break;
                }
                auto entries = core_.read_after(*after);
                wire::FrameWriter w(wire::kBbRead | wire::kRespBit);
                w.u8(wire::kOk).u64(entries.size());
                for (const auto& e : entries) {
                    w.u64(e.seq).u64(static_cast<uint64_t>(e.posted_at_ms)).field(view(e.payload));
                }
                std::lock_guard lk(write_mu);
                write_frame(fd, w.finish());
                break;
            }
            case wire::kPhPut: {
                auto addr = r.field();
                auto ct = r.field();
                if (!addr || !ct || addr->size() != 32) {
                    write_frame(fd, status_frame(frame->opcode, wire::kBadRequest));
                    break;
                }
                PutResult res = core_.put(to_addr(*addr), Bytes(ct->begin(), ct->end()));
                uint8_t status = res == PutResult::ok          ? wire::kOk
                                 : res == PutResult::collision ? wire::kCollision
                                                               : wire::kBadRequest;
                std::lock_guard lk(write_mu);
                write_frame(fd, status_frame(frame->opcode, status));
                break;
            }
            case wire::kPhGet: {
                auto addr = r.field();
                if (!addr || addr->size() != 32) {
                    write_frame(fd, status_frame(frame->opcode, wire::kBadRequest));
                    break;
                }
                auto ct = core_.get(to_addr(*addr));
                Bytes resp;
                if (ct) {
                    resp = wire::FrameWriter(wire::kPhGet | wire::kRespBit)
                               .u8(wire::kOk)
                               .field(view(*ct))
                               .finish();
                } else {
                    resp = status_frame(frame->opcode, wire::kNotFound);
                }
                std::lock_guard lk(write_mu);
                write_frame(fd, resp);
                break;
            }
            case wire::kMonitor: {
                auto since = r.u64();
                if (!since) {
                    write_frame(fd, status_frame(frame->opcode, wire::kBadRequest));
                    break;
                }
                Bytes bulk = core_.bulk_filter(static_cast<int64_t>(*since));
                {
                    Bytes resp = wire::FrameWriter(wire::kMonitor | wire::kRespBit)
                                     .u8(wire::kMonitorBulk)
                                     .field(view(bulk))
                                     .finish();
                    std::lock_guard lk(write_mu);
                    write_frame(fd, resp);
                }
                if (monitor_id == 0) {
                    monitor_id = core_.add_monitor([fd, &write_mu](uint16_t prefix) {
                        uint8_t pb[2] = {uint8_t(prefix >> 8), uint8_t(prefix)};
                        Bytes resp = wire::FrameWriter(wire::kMonitor | wire::kRespBit)
                                         .u8(wire::kMonitorFeed)
                                         .field(ByteView(pb, 2))
                                         .finish();
                        std::lock_guard lk(write_mu);
                        write_frame(fd, resp);
                    });
                }
                break;
            }
            default:
                write_frame(fd, status_frame(frame->opcode, wire::kBadRequest));
                break;
        }
    }
    if (monitor_id != 0) core_.remove_monitor(monitor_id);
    ::close(fd);
}

// ---------------------------------------------------------------------------
// Client

TcpClient::TcpClient(std::string host, uint16_t port, Runtime& rt)
    : host_(std::move(host)), port_(port), rt_(rt) {}

TcpClient::~TcpClient() { monitor_stop(); }

int TcpClient::connect_fd() const {
    int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) throw std::runtime_error("socket() failed");
    sockaddr_in sa{};
    sa.sin_family = AF_INET;
    sa.sin_port = htons(port_);
    if (inet_pton(AF_INET, host_.c_str(), &sa.sin_addr) != 1) {
        ::close(fd);
        throw std::runtime_error("bad server address: " + host_);
    }
    if (::connect(fd, reinterpret_cast<sockaddr*>(&sa), sizeof sa) != 0) {
        ::close(fd);
        throw std::runtime_error("cannot connect to " + host_ + ":" + std::to_string(port_));
    }
    int one = 1;
    setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    return fd;
}

Bytes TcpClient::request(const Bytes& frame, uint8_t expect_op) const {
    int fd = connect_fd();
    wire::FrameParser parser;
    std::optional<wire::Frame> resp;
    if (write_frame(fd, frame)) resp = read_frame(fd, parser);
    ::close(fd);
    if (!resp || resp->opcode != (expect_op | wire::kRespBit))
        throw std::runtime_error("server request failed");
    return std::move(resp->body);
}

uint64_t TcpClient::bb_broadcast(Bytes payload) {
    Bytes body = request(wire::FrameWriter(wire::kBbBroadcast).field(view(payload)).finish(),
                         wire::kBbBroadcast);
    wire::FieldReader r(view(body));
    auto status = r.u8();
    if (!status || *status != wire::kOk) throw std::length_error("broadcast rejected");
    auto seq = r.u64();
    if (!seq) throw std::runtime_error("malformed broadcast response");
    return *seq;
}

std::vector<BulletinEntry> TcpClient::bb_read(uint64_t after_seq) {
    Bytes body =
        request(wire::FrameWriter(wire::kBbRead).u64(after_seq).finish(), wire::kBbRead);
    wire::FieldReader r(view(body));
    auto status = r.u8();
    auto count = r.u64();
    if (!status || *status != wire::kOk || !count)
        throw std::runtime_error("malformed read response");
    std::vector<BulletinEntry> out;
    out.reserve(*count);
    for (uint64_t i = 0; i < *count; ++i) {
        auto seq = r.u64();
        auto t = r.u64();
        auto payload = r.field();
        if (!seq || !t || !payload) throw std::runtime_error("malformed read entry");
        out.push_back(BulletinEntry{*seq, static_cast<int64_t>(*t),
                                    Bytes(payload->begin(), payload->end())});
    }
    return out;
}

PutResult TcpClient::ph_put(const Addr& addr, Bytes ciphertext) {
    Bytes body = request(wire::FrameWriter(wire::kPhPut)
                             .field(ByteView(addr.data(), addr.size()))
                             .field(view(ciphertext))
                             .finish(),
                         wire::kPhPut);
    wire::FieldReader r(view(body));
    auto status = r.u8();
    if (!status) throw std::runtime_error("malformed put response");
    switch (*status) {
        case wire::kOk: return PutResult::ok;
        case wire::kCollision: return PutResult::collision;
        default: return PutResult::bad_length;
    }
}

std::optional<Bytes> TcpClient::ph_get(const Addr& addr) {
    Bytes body = request(
        wire::FrameWriter(wire::kPhGet).field(ByteView(addr.data(), addr.size())).finish(),
        wire::kPhGet);
    wire::FieldReader r(view(body));
    auto status = r.u8();
    if (!status) throw std::runtime_error("malformed get response");
    if (*status != wire::kOk) return std::nullopt;
    auto ct = r.field();
    if (!ct) throw std::runtime_error("malformed get response");
    return Bytes(ct->begin(), ct->end());
}

void TcpClient::monitor_start(int64_t last_online_ms, MonitorHooks hooks) {
    monitor_stop();
    monitor_stop_ = false;
    int fd = connect_fd();
    if (!write_frame(fd, wire::FrameWriter(wire::kMonitor)
                             .u64(static_cast<uint64_t>(last_online_ms))
                             .finish())) {
        ::close(fd);
        throw std::runtime_error("monitor request failed");
    }
    monitor_fd_ = fd;
    auto hooks_ptr = std::make_shared<MonitorHooks>(std::move(hooks));
    monitor_thread_ = std::thread([this, fd, hooks_ptr] { monitor_loop(fd, hooks_ptr); });
}

void TcpClient::monitor_loop(int fd, std::shared_ptr<MonitorHooks> hooks) {
    wire::FrameParser parser;
    for (;;) {
        auto frame = read_frame(fd, parser);
        if (!frame) break;
        if (frame->opcode != (wire::kMonitor | wire::kRespBit)) continue;
        wire::FieldReader r(view(frame->body));
        auto kind = r.u8();
        auto payload = r.field();
        if (!kind || !payload) continue;
        if (*kind == wire::kMonitorBulk) {
            Bytes bulk(payload->begin(), payload->end());
            rt_.post([hooks, bulk = std::move(bulk)]() mutable {
                if (hooks->on_bulk) hooks->on_bulk(std::move(bulk));
            });
        } else if (*kind == wire::kMonitorFeed && payload->size() % 2 == 0) {
            for (size_t i = 0; i + 2 <= payload->size(); i += 2) {
                uint16_t prefix = get_u16be(payload->data() + i);
                rt_.post([hooks, prefix] {
                    if (hooks->on_prefix) hooks->on_prefix(prefix);
                });
            }
        }
        if (monitor_stop_) break;
    }
    ::close(fd);
}

void TcpClient::monitor_stop() {
    monitor_stop_ = true;
    if (monitor_fd_ >= 0) {
        ::shutdown(monitor_fd_, SHUT_RDWR);
        monitor_fd_ = -1;
    }
    if (monitor_thread_.joinable()) monitor_thread_.join();
}

}  // namespace psinet::ph
