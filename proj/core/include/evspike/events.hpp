#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "evspike/errors.hpp"

namespace evspike {

enum class Polarity : std::uint8_t { kOff = 0, kOn = 1 };

// One camera event: pixel coordinates, microsecond timestamp, polarity.
struct Event {
    std::int64_t t_us = 0;
    std::int32_t x = 0;
    std::int32_t y = 0;
    Polarity polarity = Polarity::kOn;

    friend bool operator==(const Event&, const Event&) = default;
};

// Timestamp-sorted sequence of events. Equal timestamps are allowed; their
// relative order is the file/producer order and is preserved everywhere.
using EventStream = std::vector<Event>;

struct SensorGeometry {
    std::int32_t width = 0;
    std::int32_t height = 0;

    bool contains(std::int32_t x, std::int32_t y) const noexcept {
        return x >= 0 && x < width && y >= 0 && y < height;
    }
    std::int64_t pixel_count() const noexcept {
        return static_cast<std::int64_t>(width) * static_cast<std::int64_t>(height);
    }
    void validate() const;  // throws ConfigError unless both dimensions are positive

    friend bool operator==(const SensorGeometry&, const SensorGeometry&) = default;
};

// Discretization of physical time into filter steps of dt_us, counted from
// the stream epoch t0_us.
struct TimeBase {
    std::int64_t t0_us = 0;
    std::int64_t dt_us = 1000;

    void validate() const;  // throws ConfigError unless dt_us > 0

    friend bool operator==(const TimeBase&, const TimeBase&) = default;
};

// floor((t_us - t0_us) / dt_us). A timestamp before the epoch is a DataError.
std::int64_t quantize(std::int64_t t_us, const TimeBase& tb);

struct StreamViolation {
    enum class Kind { kXOutOfBounds, kYOutOfBounds, kTimestampInversion };

    std::size_t index = 0;
    Kind kind = Kind::kXOutOfBounds;
    std::string message;
};

struct ValidationReport {
    std::vector<StreamViolation> violations;

    bool ok() const noexcept { return violations.empty(); }
};

// Reports every out-of-bounds coordinate and every timestamp inversion.
// Validation never mutates the stream and never throws; violations are data.
ValidationReport validate_stream(std::span<const Event> stream, const SensorGeometry& geometry);

}  // namespace evspike
