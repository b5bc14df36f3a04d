#pragma once

#include <cstdint>
#include <optional>

#include "psinet/bytes.hpp"

namespace psinet::wire {

// Frame layout, bit-exact:
//   u32 big-endian length  (length of everything after these 4 bytes)
//   u8  opcode
//   opcode-specific fields, each length-prefixed:
//     u32 big-endian field length, raw field bytes
// Integers inside fields are 8-byte big-endian. Responses carry the request
// opcode with the high bit set. The first response field is a status byte.

enum Op : uint8_t {
    kBbBroadcast = 0x01,
    kBbRead = 0x02,
    kPhPut = 0x03,
    kPhGet = 0x04,
    kMonitor = 0x05,
    kRespBit = 0x80,
};

enum Status : uint8_t {
    kOk = 0x00,
    kError = 0x01,
    kNotFound = 0x02,
    kCollision = 0x03,
    kBadRequest = 0x04,
    kOversize = 0x05,
};

// Monitor response frames carry a kind field before the payload.
enum MonitorKind : uint8_t {
    kMonitorBulk = 0x00,   // serialized cuckoo filter over the window
    kMonitorFeed = 0x01,   // concatenated 2-byte address prefixes
};

class FrameWriter {
public:
    explicit FrameWriter(uint8_t opcode) { buf_.push_back(opcode); }

    FrameWriter& field(ByteView b) {
        put_u32be(buf_, static_cast<uint32_t>(b.size()));
        append(buf_, b);
        return *this;
    }
    FrameWriter& u64(uint64_t v) {
        auto b = u64be_bytes(v);
        return field(ByteView(b.data(), 8));
    }
    FrameWriter& u8(uint8_t v) { return field(ByteView(&v, 1)); }

    /// Final wire bytes: length prefix + opcode + fields.
    Bytes finish() const {
        Bytes out;
        out.reserve(4 + buf_.size());
        put_u32be(out, static_cast<uint32_t>(buf_.size()));
        append(out, view(buf_));
        return out;
    }

private:
    Bytes buf_;
};

/// Cursor over the body of one frame (opcode already consumed).
class FieldReader {
public:
    explicit FieldReader(ByteView body) : body_(body) {}

    std::optional<ByteView> field() {
        if (body_.size() < 4) return std::nullopt;
        uint32_t n = get_u32be(body_.data());
        if (body_.size() < 4 + size_t(n)) return std::nullopt;
        ByteView f = body_.subspan(4, n);
        body_ = body_.subspan(4 + n);
        return f;
    }
    std::optional<uint64_t> u64() {
        auto f = field();
        if (!f || f->size() != 8) return std::nullopt;
        return get_u64be(f->data());
    }
    std::optional<uint8_t> u8() {
        auto f = field();
        if (!f || f->size() != 1) return std::nullopt;
        return (*f)[0];
    }
    bool done() const { return body_.empty(); }

private:
    ByteView body_;
};

struct Frame {
    uint8_t opcode = 0;
    Bytes body;
};

/// Incremental frame decoder for a byte stream.
class FrameParser {
public:
    void feed(ByteView b) { append(buf_, b); }
    /// Pops one complete frame if available. Throws on oversize frames.
    std::optional<Frame> next();

    static constexpr size_t kMaxFrame = 64 << 20;

private:
    Bytes buf_;
    size_t consumed_ = 0;
};

// Exact wire sizes for the bandwidth accounting model; unit tests pin these
// to the encoder output.
constexpr size_t frame_bytes(size_t body) { return 4 + 1 + body; }
constexpr size_t field_bytes(size_t n) { return 4 + n; }

constexpr size_t put_request_bytes(size_t ct_len) {
    return frame_bytes(field_bytes(32) + field_bytes(ct_len));
}
constexpr size_t put_response_bytes() { return frame_bytes(field_bytes(1)); }
constexpr size_t get_request_bytes() { return frame_bytes(field_bytes(32)); }
constexpr size_t get_hit_response_bytes(size_t ct_len) {
    return frame_bytes(field_bytes(1) + field_bytes(ct_len));
}
constexpr size_t get_miss_response_bytes() { return frame_bytes(field_bytes(1)); }
constexpr size_t broadcast_request_bytes(size_t payload) {
    return frame_bytes(field_bytes(payload));
}
constexpr size_t broadcast_response_bytes() {
    return frame_bytes(field_bytes(1) + field_bytes(8));
}
constexpr size_t read_request_bytes() { return frame_bytes(field_bytes(8)); }
constexpr size_t read_response_base_bytes() {
    return frame_bytes(field_bytes(1) + field_bytes(8));
}
constexpr size_t read_entry_bytes(size_t payload) {
    return field_bytes(8) + field_bytes(8) + field_bytes(payload);
}
constexpr size_t monitor_request_bytes() { return frame_bytes(field_bytes(8)); }
constexpr size_t monitor_bulk_bytes(size_t filter_len) {
    return frame_bytes(field_bytes(1) + field_bytes(filter_len));
}
/// Feed prefixes are batched; per-batch overhead amortizes to ~0 at rate.
constexpr size_t kFeedBatch = 256;
constexpr size_t monitor_feed_bytes(size_t n_prefixes) {
    size_t batches = (n_prefixes + kFeedBatch - 1) / kFeedBatch;
    return batches * frame_bytes(field_bytes(1)) + field_bytes(0) * batches +
           2 * n_prefixes;
}

}  // namespace psinet::wire
