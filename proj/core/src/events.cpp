#include "evspike/events.hpp"

#include <limits>
#include <sstream>

#include "evspike/errors.hpp"

namespace evspike {

void SensorGeometry::validate() const {
    if (width <= 0 || height <= 0) {
        std::ostringstream msg;
        msg << "sensor geometry must be positive, got " << width << "x" << height;
        throw ConfigError(msg.str());
    }
}

void TimeBase::validate() const {
    if (dt_us <= 0) {
        std::ostringstream msg;
        msg << "time step must be positive, got " << dt_us << "us";
        throw ConfigError(msg.str());
    }
}

std::int64_t quantize(std::int64_t t_us, const TimeBase& tb) {
    tb.validate();
    if (t_us < tb.t0_us) {
        std::ostringstream msg;
        msg << "timestamp " << t_us << "us precedes stream epoch " << tb.t0_us << "us";
        throw DataError(msg.str());
    }
    return (t_us - tb.t0_us) / tb.dt_us;
}

ValidationReport validate_stream(std::span<const Event> stream, const SensorGeometry& geometry) {
    geometry.validate();
    ValidationReport report;
    std::int64_t prev_t = std::numeric_limits<std::int64_t>::min();
    for (std::size_t i = 0; i < stream.size(); ++i) {
        const Event& e = stream[i];
        if (e.x < 0 || e.x >= geometry.width) {
            std::ostringstream msg;
            msg << "event " << i << ": x=" << e.x << " outside [0, " << geometry.width << ")";
            report.violations.push_back({i, StreamViolation::Kind::kXOutOfBounds, msg.str()});
        }
        if (e.y < 0 || e.y >= geometry.height) {
            std::ostringstream msg;
            msg << "event " << i << ": y=" << e.y << " outside [0, " << geometry.height << ")";
            report.violations.push_back({i, StreamViolation::Kind::kYOutOfBounds, msg.str()});
        }
        if (e.t_us < prev_t) {
            std::ostringstream msg;
            msg << "event " << i << ": t=" << e.t_us << "us before predecessor " << prev_t
                << "us";
            report.violations.push_back({i, StreamViolation::Kind::kTimestampInversion, msg.str()});
        }
        prev_t = e.t_us;
    }
    return report;
}

}  // namespace evspike
