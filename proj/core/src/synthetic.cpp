#include "evspike/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "evspike/errors.hpp"

namespace evspike {

namespace {

struct RawBox {
    std::int64_t left = 0;
    std::int64_t top = 0;
};

RawBox raw_position(const MovingObjectSpec& o, std::int64_t t_us) {
    const double ts = static_cast<double>(t_us) * 1e-6;
    return {std::llround(o.x0 + o.vx * ts), std::llround(o.y0 + o.vy * ts)};
}

// Sorted row-major pixel indices covered by the object at t, clipped to the
// sensor. Outline objects keep only pixels on the unclipped rectangle's rim.
std::vector<std::int64_t> occupancy(const MovingObjectSpec& o, std::int64_t t_us,
                                    const SensorGeometry& g) {
    const RawBox rb = raw_position(o, t_us);
    const std::int64_t right = rb.left + o.width - 1;
    const std::int64_t bottom = rb.top + o.height - 1;
    const std::int64_t x_lo = std::max<std::int64_t>(rb.left, 0);
    const std::int64_t x_hi = std::min<std::int64_t>(right, g.width - 1);
    const std::int64_t y_lo = std::max<std::int64_t>(rb.top, 0);
    const std::int64_t y_hi = std::min<std::int64_t>(bottom, g.height - 1);
    std::vector<std::int64_t> out;
    if (x_lo > x_hi || y_lo > y_hi) return out;
    for (std::int64_t y = y_lo; y <= y_hi; ++y) {
        for (std::int64_t x = x_lo; x <= x_hi; ++x) {
            if (o.fill == MovingObjectSpec::Fill::kOutline && x != rb.left && x != right &&
                y != rb.top && y != bottom) {
                continue;
            }
            out.push_back(y * g.width + x);
        }
    }
    return out;
}

}  // namespace

void SceneSpec::validate() const {
    geometry.validate();
    if (duration_us <= 0) {
        std::ostringstream msg;
        msg << "scene duration must be positive, got " << duration_us << "us";
        throw ConfigError(msg.str());
    }
    if (gen_dt_us <= 0) throw ConfigError("scene tick length must be positive");
    if (frame_interval_us <= 0) throw ConfigError("ground-truth frame interval must be positive");
    if (!(noise_rate_hz_per_pixel >= 0.0) || !std::isfinite(noise_rate_hz_per_pixel)) {
        throw ConfigError("noise rate must be non-negative and finite");
    }
    if (!(static_rate_hz_per_pixel >= 0.0) || !std::isfinite(static_rate_hz_per_pixel)) {
        throw ConfigError("static-texture rate must be non-negative and finite");
    }
    for (std::size_t i = 0; i < objects.size(); ++i) {
        const MovingObjectSpec& o = objects[i];
        if (o.width < 2 || o.height < 2) {
            std::ostringstream msg;
            msg << "object " << i << ": width and height must be at least 2, got " << o.width
                << "x" << o.height;
            throw ConfigError(msg.str());
        }
        if (!std::isfinite(o.x0) || !std::isfinite(o.y0) || !std::isfinite(o.vx) ||
            !std::isfinite(o.vy)) {
            std::ostringstream msg;
            msg << "object " << i << ": position and velocity must be finite";
            throw ConfigError(msg.str());
        }
    }
    for (std::size_t i = 0; i < static_regions.size(); ++i) {
        const BoundingBox& b = static_regions[i].box;
        if (b.x_min > b.x_max || b.y_min > b.y_max) {
            std::ostringstream msg;
            msg << "static region " << i << ": min corner exceeds max corner";
            throw ConfigError(msg.str());
        }
    }
}

std::optional<BoundingBox> true_box(const MovingObjectSpec& object, std::int64_t t_us,
                                    const SensorGeometry& geometry) {
    const RawBox rb = raw_position(object, t_us);
    const std::int64_t x_lo = std::max<std::int64_t>(rb.left, 0);
    const std::int64_t x_hi = std::min<std::int64_t>(rb.left + object.width - 1, geometry.width - 1);
    const std::int64_t y_lo = std::max<std::int64_t>(rb.top, 0);
    const std::int64_t y_hi = std::min<std::int64_t>(rb.top + object.height - 1, geometry.height - 1);
    if (x_lo > x_hi || y_lo > y_hi) return std::nullopt;
    return BoundingBox{static_cast<std::int32_t>(x_lo), static_cast<std::int32_t>(y_lo),
                       static_cast<std::int32_t>(x_hi), static_cast<std::int32_t>(y_hi)};
}

GeneratedScene generate(const SceneSpec& spec) {
    spec.validate();
    const SensorGeometry& g = spec.geometry;
    GeneratedScene scene;
    std::vector<LabeledEvent> object_events;

    // Object events appear exactly where rasterized occupancy changes between
    // consecutive ticks; tick 0 is the baseline and emits nothing, so a
    // motionless object is silent.
    const std::int64_t ticks = spec.duration_us / spec.gen_dt_us;
    std::vector<std::int64_t> gained;
    std::vector<std::int64_t> lost;
    for (const MovingObjectSpec& o : spec.objects) {
        std::vector<std::int64_t> prev = occupancy(o, 0, g);
        for (std::int64_t n = 1; n <= ticks; ++n) {
            const std::int64_t t = n * spec.gen_dt_us;
            std::vector<std::int64_t> curr = occupancy(o, t, g);
            gained.clear();
            lost.clear();
            std::set_difference(curr.begin(), curr.end(), prev.begin(), prev.end(),
                                std::back_inserter(gained));
            std::set_difference(prev.begin(), prev.end(), curr.begin(), curr.end(),
                                std::back_inserter(lost));
            for (std::int64_t px : gained) {
                object_events.push_back({{t, static_cast<std::int32_t>(px % g.width),
                                          static_cast<std::int32_t>(px / g.width), Polarity::kOn},
                                         {EventSource::Kind::kObject, o.object_id}});
            }
            for (std::int64_t px : lost) {
                object_events.push_back({{t, static_cast<std::int32_t>(px % g.width),
                                          static_cast<std::int32_t>(px / g.width), Polarity::kOff},
                                         {EventSource::Kind::kObject, o.object_id}});
            }
            prev = std::move(curr);
        }
    }
    std::stable_sort(object_events.begin(), object_events.end(),
                     [](const LabeledEvent& a, const LabeledEvent& b) {
                         return a.event.t_us < b.event.t_us;
                     });

    std::mt19937_64 rng(spec.rng_seed);
    const double duration_s = static_cast<double>(spec.duration_us) * 1e-6;
    auto poisson_count = [&](double mean) -> std::int64_t {
        if (mean <= 0.0) return 0;
        std::poisson_distribution<std::int64_t> dist(mean);
        return dist(rng);
    };
    std::uniform_int_distribution<std::int64_t> any_t(0, spec.duration_us - 1);
    std::uniform_int_distribution<int> any_p(0, 1);

    std::vector<LabeledEvent> noise_events;
    if (spec.noise_rate_hz_per_pixel > 0.0) {
        const double mean =
            spec.noise_rate_hz_per_pixel * static_cast<double>(g.pixel_count()) * duration_s;
        const std::int64_t count = poisson_count(mean);
        std::uniform_int_distribution<std::int32_t> any_x(0, g.width - 1);
        std::uniform_int_distribution<std::int32_t> any_y(0, g.height - 1);
        noise_events.reserve(static_cast<std::size_t>(count));
        for (std::int64_t i = 0; i < count; ++i) {
            noise_events.push_back({{any_t(rng), any_x(rng), any_y(rng),
                                     any_p(rng) ? Polarity::kOn : Polarity::kOff},
                                    {EventSource::Kind::kNoise, 0}});
        }
        std::stable_sort(noise_events.begin(), noise_events.end(),
                         [](const LabeledEvent& a, const LabeledEvent& b) {
                             return a.event.t_us < b.event.t_us;
                         });
    }

    std::vector<LabeledEvent> static_events;
    if (spec.static_rate_hz_per_pixel > 0.0) {
        for (const StaticRegion& region : spec.static_regions) {
            const std::int32_t x_lo = std::max(region.box.x_min, 0);
            const std::int32_t x_hi = std::min(region.box.x_max, g.width - 1);
            const std::int32_t y_lo = std::max(region.box.y_min, 0);
            const std::int32_t y_hi = std::min(region.box.y_max, g.height - 1);
            if (x_lo > x_hi || y_lo > y_hi) continue;
            const double area = static_cast<double>(x_hi - x_lo + 1) *
                                static_cast<double>(y_hi - y_lo + 1);
            const std::int64_t count =
                poisson_count(spec.static_rate_hz_per_pixel * area * duration_s);
            std::uniform_int_distribution<std::int32_t> region_x(x_lo, x_hi);
            std::uniform_int_distribution<std::int32_t> region_y(y_lo, y_hi);
            for (std::int64_t i = 0; i < count; ++i) {
                static_events.push_back({{any_t(rng), region_x(rng), region_y(rng),
                                          any_p(rng) ? Polarity::kOn : Polarity::kOff},
                                         {EventSource::Kind::kStatic, 0}});
            }
        }
        std::stable_sort(static_events.begin(), static_events.end(),
                         [](const LabeledEvent& a, const LabeledEvent& b) {
                             return a.event.t_us < b.event.t_us;
                         });
    }

    // Equal timestamps keep object-then-static-then-noise order.
    scene.events = std::move(object_events);
    scene.events.insert(scene.events.end(), static_events.begin(), static_events.end());
    scene.events.insert(scene.events.end(), noise_events.begin(), noise_events.end());
    std::stable_sort(scene.events.begin(), scene.events.end(),
                     [](const LabeledEvent& a, const LabeledEvent& b) {
                         return a.event.t_us < b.event.t_us;
                     });

    for (std::int64_t t = spec.frame_interval_us; t <= spec.duration_us;
         t += spec.frame_interval_us) {
        GroundTruthFrame frame;
        frame.t_us = t;
        for (const MovingObjectSpec& o : spec.objects) {
            if (auto box = true_box(o, t, g)) frame.boxes.push_back({*box, o.object_id});
        }
        scene.ground_truth.push_back(std::move(frame));
    }
    return scene;
}

EventStream strip_labels(std::span<const LabeledEvent> events) {
    EventStream out;
    out.reserve(events.size());
    for (const LabeledEvent& le : events) out.push_back(le.event);
    return out;
}

}  // namespace evspike
