#pragma once

#include <cstdint>

namespace psinet {

inline constexpr int64_t kSecondMs = 1000;
inline constexpr int64_t kMinuteMs = 60 * kSecondMs;
inline constexpr int64_t kHourMs = 60 * kMinuteMs;
inline constexpr int64_t kDayMs = 24 * kHourMs;

/// All expiry and scheduling logic reads time through this so the simulator
/// can time-travel.
struct Clock {
    virtual ~Clock() = default;
    virtual int64_t now_ms() const = 0;
};

struct SystemClock : Clock {
    int64_t now_ms() const override;
};

}  // namespace psinet
