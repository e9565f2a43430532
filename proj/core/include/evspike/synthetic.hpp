#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "evspike/events.hpp"
#include "evspike/records.hpp"

namespace evspike {

// Linear constant-velocity box. Position is kept in continuous pixels and
// rounded to the nearest integer pixel when rasterized, so a slow object sits
// still for several ticks and then advances a whole pixel.
struct MovingObjectSpec {
    std::int64_t object_id = 0;
    double x0 = 0.0;  // top-left corner at t = 0
    double y0 = 0.0;
    std::int32_t width = 2;   // >= 2
    std::int32_t height = 2;  // >= 2
    double vx = 0.0;          // pixels per second
    double vy = 0.0;
    enum class Fill : std::uint8_t { kSolid, kOutline } fill = Fill::kSolid;
};

struct StaticRegion {
    BoundingBox box;
};

struct SceneSpec {
    SensorGeometry geometry;
    std::int64_t duration_us = 0;
    std::int64_t gen_dt_us = 1000;  // tick length of the motion rasterizer
    std::vector<MovingObjectSpec> objects;
    double noise_rate_hz_per_pixel = 0.0;
    std::vector<StaticRegion> static_regions;
    double static_rate_hz_per_pixel = 0.0;
    std::int64_t frame_interval_us = 33000;  // ground-truth frame cadence
    std::uint64_t rng_seed = 0;

    void validate() const;  // throws ConfigError
};

struct EventSource {
    enum class Kind : std::uint8_t { kObject, kNoise, kStatic };

    Kind kind = Kind::kObject;
    std::int64_t object_id = 0;  // meaningful for kObject only

    friend bool operator==(const EventSource&, const EventSource&) = default;
};

struct LabeledEvent {
    Event event;
    EventSource source;

    friend bool operator==(const LabeledEvent&, const LabeledEvent&) = default;
};

struct GeneratedScene {
    std::vector<LabeledEvent> events;  // timestamp-sorted
    std::vector<GroundTruthFrame> ground_truth;
};

// Deterministic for a fixed (spec, seed): bit-for-bit identical outputs on
// repeated calls. Object events are emitted exactly where rasterized
// occupancy changes between consecutive ticks (newly covered pixels ON,
// uncovered pixels OFF); tick 0 is the baseline and emits nothing. Noise and
// static-texture events are Poisson processes labeled as such.
GeneratedScene generate(const SceneSpec& spec);

// The object's rounded box at time t, clipped to the sensor; nullopt once the
// box is fully off-sensor.
std::optional<BoundingBox> true_box(const MovingObjectSpec& object, std::int64_t t_us,
                                    const SensorGeometry& geometry);

EventStream strip_labels(std::span<const LabeledEvent> events);

}  // namespace evspike
