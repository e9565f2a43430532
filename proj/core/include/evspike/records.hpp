#pragma once

#include <cstdint>
#include <vector>

namespace evspike {

// Axis-aligned pixel box with inclusive bounds: a one-pixel box has
// x_min == x_max and area 1.
struct BoundingBox {
    std::int32_t x_min = 0;
    std::int32_t y_min = 0;
    std::int32_t x_max = 0;
    std::int32_t y_max = 0;

    std::int64_t width() const noexcept { return static_cast<std::int64_t>(x_max) - x_min + 1; }
    std::int64_t height() const noexcept { return static_cast<std::int64_t>(y_max) - y_min + 1; }
    std::int64_t area() const noexcept { return width() * height(); }

    friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

struct DetectionBox {
    BoundingBox box;
    std::int32_t band = 0;         // speed band index; -1 is the residual band
    std::int64_t event_count = 0;  // cluster size behind this box

    friend bool operator==(const DetectionBox&, const DetectionBox&) = default;
};

struct DetectionRecord {
    std::int64_t t_us = 0;
    std::vector<DetectionBox> boxes;

    friend bool operator==(const DetectionRecord&, const DetectionRecord&) = default;
};

struct GroundTruthBox {
    BoundingBox box;
    std::int64_t object_id = 0;

    friend bool operator==(const GroundTruthBox&, const GroundTruthBox&) = default;
};

struct GroundTruthFrame {
    std::int64_t t_us = 0;
    std::vector<GroundTruthBox> boxes;  // may be empty: a frame where nothing moves

    friend bool operator==(const GroundTruthFrame&, const GroundTruthFrame&) = default;
};

}  // namespace evspike
