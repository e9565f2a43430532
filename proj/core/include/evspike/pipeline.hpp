#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "evspike/dbscan.hpp"
#include "evspike/events.hpp"
#include "evspike/lif.hpp"
#include "evspike/records.hpp"

namespace evspike {

struct SpeedBranchConfig {
    std::int32_t band_index = 0;   // assigned by position, ascending with speed
    double threshold_speed = 0.0;  // px/s this branch was tuned to pass; documentation value
    LifParams lif;
};

struct EvalSchedule {
    std::vector<std::int64_t> timestamps;  // explicit list; wins over interval when non-empty
    std::int64_t interval_us = 0;          // t0 + k * interval for k >= 1
    std::int64_t end_us = 0;               // 0: interval mode ends at the last event

    void validate() const;
};

struct PipelineConfig {
    SensorGeometry geometry;
    TimeBase time_base;
    std::vector<SpeedBranchConfig> branches;  // strictly increasing threshold_speed
    DbscanParams dbscan;
    std::int32_t min_cluster_size = 0;  // 0: defaults to dbscan.min_pts
    std::int64_t window_us = 33000;     // clustering window (t_f - window, t_f]
    EvalSchedule eval;
    bool include_residual_band = false;  // emit band -1: events recovered by no branch
    bool parallel_branches = false;      // batch detect() runs branches concurrently

    void validate() const;  // throws ConfigError
    // Non-fatal notes when branches leave the calibrated regime (shared
    // kernel/threshold/recovery, beta falling as speed rises).
    std::vector<std::string> regime_warnings() const;
    std::int32_t effective_min_cluster_size() const {
        return min_cluster_size > 0 ? min_cluster_size : dbscan.min_pts;
    }
};

// Multiset difference keyed by (t_us, x, y, polarity): events of `lower` not
// matched one-for-one by events of `upper`. Order follows `lower`.
EventStream band_difference(std::span<const Event> lower, std::span<const Event> upper);

struct BandOutput {
    std::int32_t band_index = 0;  // -1 for the residual band
    double speed_lo = 0.0;        // band covers speeds [speed_lo, speed_hi)
    double speed_hi = std::numeric_limits<double>::infinity();
    EventStream events;
};

struct DetectOutput {
    std::vector<DetectionRecord> records;
    std::vector<BandOutput> bands;
};

// Batch detection over a whole validated stream. Branch outputs are
// differenced into speed bands, each band is clustered over the trailing
// window at every eval timestamp, and boxes are tagged with their band index.
// Identical results whether branches run sequentially or in parallel.
DetectOutput detect(std::span<const Event> stream, const PipelineConfig& config);

using RecordSink = std::function<void(const DetectionRecord&)>;
// Observes every event the moment it is assigned to a speed band.
using BandEventSink = std::function<void(std::int32_t band_index, const Event&)>;

// Incremental front-end over the same machinery: feed events in timestamp
// order, records come out as their windows close. Peak buffering is bounded
// by the two-step branch buffers plus one clustering window, independent of
// stream length.
class StreamingDetector {
public:
    StreamingDetector(const PipelineConfig& config, RecordSink sink, bool collect_bands = false,
                      BandEventSink band_sink = nullptr);
    ~StreamingDetector();

    StreamingDetector(StreamingDetector&&) noexcept;
    StreamingDetector& operator=(StreamingDetector&&) noexcept;

    void feed(const Event& e);
    void finish();

    const std::vector<BandOutput>& bands() const;  // populated when collect_bands
    std::size_t peak_buffered_events() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

struct CalibrationResult {
    LifParams params;      // calibrated branch parameters (beta filled in)
    double beta_lo = 0.0;  // smallest beta that met the fast criterion
    double beta_hi = 0.0;  // largest beta that met the slow criterion
    double fast_fraction = 0.0;  // spike fraction at target speed, final beta
    double slow_fraction = 0.0;  // spike fraction at half speed, final beta
};

// Tunes beta for one branch at a fixed threshold: a solid probe bar swept at
// target_speed must spike in at least half of its emission steps while the
// same bar at half speed stays at or below 5%. Binary-searches both bounds in
// (0, 1) and returns their midpoint. Throws DataError with the measured
// fractions when no beta separates the two speeds.
CalibrationResult calibrate_branch(double target_speed, const TimeBase& tb,
                                   const SensorGeometry& geometry, double u_thr = 1.0);

}  // namespace evspike
