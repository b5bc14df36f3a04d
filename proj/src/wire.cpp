#include "psinet/wire.hpp"

#include <stdexcept>

namespace psinet::wire {

std::optional<Frame> FrameParser::next() {
    // drop consumed prefix occasionally to keep the buffer bounded
    if (consumed_ > 0 && (consumed_ > buf_.size() / 2 || consumed_ > (1 << 16))) {
        buf_.erase(buf_.begin(), buf_.begin() + consumed_);
        consumed_ = 0;
    }
    size_t avail = buf_.size() - consumed_;
    if (avail < 4) return std::nullopt;
    uint32_t len = get_u32be(buf_.data() + consumed_);
    if (len < 1 || len > kMaxFrame) throw std::runtime_error("wire: bad frame length");
    if (avail < 4 + size_t(len)) return std::nullopt;
    Frame f;
    f.opcode = buf_[consumed_ + 4];
    f.body.assign(buf_.begin() + consumed_ + 5, buf_.begin() + consumed_ + 4 + len);
    consumed_ += 4 + len;
    return f;
}

}  // namespace psinet::wire
