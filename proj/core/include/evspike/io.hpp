#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "evspike/errors.hpp"
#include "evspike/evaluation.hpp"
#include "evspike/events.hpp"
#include "evspike/records.hpp"
#include "evspike/synthetic.hpp"

namespace evspike {

// Events CSV: `t_us,x,y,p` per line, p in {0,1}, optional `t,x,y,p` header.
// Any malformed line aborts with a ParseError carrying its 1-based number.

// Incremental reader for streaming consumption of large files.
class EventCsvReader {
public:
    explicit EventCsvReader(std::istream& in);

    std::optional<Event> next();  // nullopt at end of input
    std::size_t line() const noexcept { return line_; }

private:
    std::istream& in_;
    std::size_t line_ = 0;
    bool checked_header_ = false;
};

EventStream read_events_csv(std::istream& in);
std::size_t write_events_csv(std::span<const Event> events, std::ostream& out);

// Labeled-events CSV: `t_us,x,y,p,source` where source is an object id,
// NOISE, or STATIC.
std::vector<LabeledEvent> read_labels_csv(std::istream& in);
std::size_t write_labels_csv(std::span<const LabeledEvent> events, std::ostream& out);

// Detections: one JSON object per line,
// {"t_us":...,"boxes":[{"x_min":..,"y_min":..,"x_max":..,"y_max":..,"band":..,"n":..}]}
std::vector<DetectionRecord> read_detections(std::istream& in);
std::size_t write_detections(std::span<const DetectionRecord> records, std::ostream& out);

// Ground truth: same shape with "object_id" instead of "band"/"n".
std::vector<GroundTruthFrame> read_ground_truth(std::istream& in);
std::size_t write_ground_truth(std::span<const GroundTruthFrame> frames, std::ostream& out);

// Metrics: a single JSON object with keys mean_iou, precision, recall, tp,
// fp, fn. Floats are written with round-trip precision.
Metrics read_metrics(std::istream& in);
std::size_t write_metrics(const Metrics& metrics, std::ostream& out);

// File conveniences. Open failures raise IoError with the path.
EventStream read_events_csv_file(const std::string& path);
std::vector<DetectionRecord> read_detections_file(const std::string& path);
std::vector<GroundTruthFrame> read_ground_truth_file(const std::string& path);

}  // namespace evspike
