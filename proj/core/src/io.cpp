#include "evspike/io.hpp"

#include <charconv>
#include <fstream>
#include <limits>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>

#include <json.hpp>

namespace evspike {

namespace {

using ojson = nlohmann::ordered_json;

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

// Splits on commas; no quoting (none of the formats need it).
std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(trim(line.substr(start)));
            return out;
        }
        out.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
}

std::int64_t parse_i64_field(std::string_view field, std::size_t line, const char* what) {
    std::int64_t value = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
        std::ostringstream msg;
        msg << "expected integer " << what << ", got '" << std::string(field) << "'";
        throw ParseError(line, msg.str());
    }
    return value;
}

std::int32_t parse_i32_field(std::string_view field, std::size_t line, const char* what) {
    std::int64_t v = parse_i64_field(field, line, what);
    if (v < std::numeric_limits<std::int32_t>::min() || v > std::numeric_limits<std::int32_t>::max()) {
        std::ostringstream msg;
        msg << what << " out of 32-bit range: " << v;
        throw ParseError(line, msg.str());
    }
    return static_cast<std::int32_t>(v);
}

Polarity parse_polarity_field(std::string_view field, std::size_t line) {
    if (field == "0") return Polarity::kOff;
    if (field == "1") return Polarity::kOn;
    throw ParseError(line, "polarity must be 0 or 1, got '" + std::string(field) + "'");
}

bool is_header(const std::vector<std::string_view>& fields) {
    if (fields.size() < 4) return false;
    return (fields[0] == "t_us" || fields[0] == "t") && fields[1] == "x" && fields[2] == "y" &&
           (fields[3] == "p" || fields[3] == "polarity");
}

bool blank(std::string_view s) { return trim(s).empty(); }

std::string_view strip_cr(std::string_view s) {
    if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
    return s;
}

Event parse_event_fields(const std::vector<std::string_view>& fields, std::size_t line) {
    Event e;
    e.t_us = parse_i64_field(fields[0], line, "timestamp");
    e.x = parse_i32_field(fields[1], line, "x");
    e.y = parse_i32_field(fields[2], line, "y");
    e.polarity = parse_polarity_field(fields[3], line);
    return e;
}

// --- JSON helpers -----------------------------------------------------------

std::int64_t json_int(const ojson& j, const char* key, std::size_t line) {
    auto it = j.find(key);
    if (it == j.end()) throw ParseError(line, std::string("missing key '") + key + "'");
    if (!it->is_number_integer()) {
        throw ParseError(line, std::string("key '") + key + "' must be an integer");
    }
    return it->get<std::int64_t>();
}

std::int32_t json_i32(const ojson& j, const char* key, std::size_t line) {
    std::int64_t v = json_int(j, key, line);
    if (v < std::numeric_limits<std::int32_t>::min() || v > std::numeric_limits<std::int32_t>::max()) {
        throw ParseError(line, std::string("key '") + key + "' out of 32-bit range");
    }
    return static_cast<std::int32_t>(v);
}

const ojson& json_boxes(const ojson& j, std::size_t line) {
    auto it = j.find("boxes");
    if (it == j.end()) throw ParseError(line, "missing key 'boxes'");
    if (!it->is_array()) throw ParseError(line, "key 'boxes' must be an array");
    return *it;
}

ojson parse_line_json(const std::string& line, std::size_t line_no) {
    try {
        return ojson::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(line_no, e.what());
    }
}

BoundingBox json_box(const ojson& jb, std::size_t line) {
    BoundingBox b;
    b.x_min = json_i32(jb, "x_min", line);
    b.y_min = json_i32(jb, "y_min", line);
    b.x_max = json_i32(jb, "x_max", line);
    b.y_max = json_i32(jb, "y_max", line);
    if (b.x_min > b.x_max || b.y_min > b.y_max) {
        throw ParseError(line, "box min exceeds max");
    }
    return b;
}

ojson box_to_json(const BoundingBox& b) {
    ojson j;
    j["x_min"] = b.x_min;
    j["y_min"] = b.y_min;
    j["x_max"] = b.x_max;
    j["y_max"] = b.y_max;
    return j;
}

}  // namespace

// --- events CSV --------------------------------------------------------------

EventCsvReader::EventCsvReader(std::istream& in) : in_(in) {}

std::optional<Event> EventCsvReader::next() {
    std::string raw;
    while (std::getline(in_, raw)) {
        ++line_;
        std::string_view sv = strip_cr(raw);
        if (blank(sv)) continue;
        auto fields = split_fields(sv);
        if (!checked_header_) {
            checked_header_ = true;
            if (is_header(fields)) continue;
        }
        if (fields.size() != 4) {
            std::ostringstream msg;
            msg << "expected 4 fields (t_us,x,y,p), got " << fields.size();
            throw ParseError(line_, msg.str());
        }
        return parse_event_fields(fields, line_);
    }
    if (in_.bad()) throw IoError("read failure on event stream");
    return std::nullopt;
}

EventStream read_events_csv(std::istream& in) {
    EventCsvReader reader(in);
    EventStream out;
    while (auto e = reader.next()) out.push_back(*e);
    return out;
}

std::size_t write_events_csv(std::span<const Event> events, std::ostream& out) {
    out << "t_us,x,y,p\n";
    for (const Event& e : events) {
        out << e.t_us << ',' << e.x << ',' << e.y << ',' << static_cast<int>(e.polarity) << '\n';
    }
    if (!out) throw IoError("write failure on event stream");
    return events.size();
}

// --- labeled events CSV --------------------------------------------------------

std::vector<LabeledEvent> read_labels_csv(std::istream& in) {
    std::vector<LabeledEvent> out;
    std::string raw;
    std::size_t line = 0;
    bool checked_header = false;
    while (std::getline(in, raw)) {
        ++line;
        std::string_view sv = strip_cr(raw);
        if (blank(sv)) continue;
        auto fields = split_fields(sv);
        if (!checked_header) {
            checked_header = true;
            if (is_header(fields) && fields.size() == 5 && fields[4] == "source") continue;
        }
        if (fields.size() != 5) {
            std::ostringstream msg;
            msg << "expected 5 fields (t_us,x,y,p,source), got " << fields.size();
            throw ParseError(line, msg.str());
        }
        LabeledEvent le;
        le.event = parse_event_fields(fields, line);
        if (fields[4] == "NOISE") {
            le.source = {EventSource::Kind::kNoise, 0};
        } else if (fields[4] == "STATIC") {
            le.source = {EventSource::Kind::kStatic, 0};
        } else {
            le.source = {EventSource::Kind::kObject, parse_i64_field(fields[4], line, "object id")};
        }
        out.push_back(le);
    }
    if (in.bad()) throw IoError("read failure on label stream");
    return out;
}

std::size_t write_labels_csv(std::span<const LabeledEvent> events, std::ostream& out) {
    out << "t_us,x,y,p,source\n";
    for (const LabeledEvent& le : events) {
        const Event& e = le.event;
        out << e.t_us << ',' << e.x << ',' << e.y << ',' << static_cast<int>(e.polarity) << ',';
        switch (le.source.kind) {
            case EventSource::Kind::kObject: out << le.source.object_id; break;
            case EventSource::Kind::kNoise: out << "NOISE"; break;
            case EventSource::Kind::kStatic: out << "STATIC"; break;
        }
        out << '\n';
    }
    if (!out) throw IoError("write failure on label stream");
    return events.size();
}

// --- detections JSONL -----------------------------------------------------------

std::vector<DetectionRecord> read_detections(std::istream& in) {
    std::vector<DetectionRecord> out;
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        if (blank(strip_cr(raw))) continue;
        ojson j = parse_line_json(raw, line);
        DetectionRecord rec;
        rec.t_us = json_int(j, "t_us", line);
        for (const ojson& jb : json_boxes(j, line)) {
            DetectionBox db;
            db.box = json_box(jb, line);
            db.band = json_i32(jb, "band", line);
            db.event_count = json_int(jb, "n", line);
            rec.boxes.push_back(db);
        }
        out.push_back(std::move(rec));
    }
    if (in.bad()) throw IoError("read failure on detections stream");
    return out;
}

std::size_t write_detections(std::span<const DetectionRecord> records, std::ostream& out) {
    for (const DetectionRecord& rec : records) {
        ojson j;
        j["t_us"] = rec.t_us;
        ojson boxes = ojson::array();
        for (const DetectionBox& db : rec.boxes) {
            ojson jb = box_to_json(db.box);
            jb["band"] = db.band;
            jb["n"] = db.event_count;
            boxes.push_back(std::move(jb));
        }
        j["boxes"] = std::move(boxes);
        out << j.dump() << '\n';
    }
    if (!out) throw IoError("write failure on detections stream");
    return records.size();
}

// --- ground truth JSONL --------------------------------------------------------

std::vector<GroundTruthFrame> read_ground_truth(std::istream& in) {
    std::vector<GroundTruthFrame> out;
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        if (blank(strip_cr(raw))) continue;
        ojson j = parse_line_json(raw, line);
        GroundTruthFrame frame;
        frame.t_us = json_int(j, "t_us", line);
        for (const ojson& jb : json_boxes(j, line)) {
            GroundTruthBox gb;
            gb.box = json_box(jb, line);
            gb.object_id = json_int(jb, "object_id", line);
            frame.boxes.push_back(gb);
        }
        out.push_back(std::move(frame));
    }
    if (in.bad()) throw IoError("read failure on ground-truth stream");
    return out;
}

std::size_t write_ground_truth(std::span<const GroundTruthFrame> frames, std::ostream& out) {
    for (const GroundTruthFrame& frame : frames) {
        ojson j;
        j["t_us"] = frame.t_us;
        ojson boxes = ojson::array();
        for (const GroundTruthBox& gb : frame.boxes) {
            ojson jb = box_to_json(gb.box);
            jb["object_id"] = gb.object_id;
            boxes.push_back(std::move(jb));
        }
        j["boxes"] = std::move(boxes);
        out << j.dump() << '\n';
    }
    if (!out) throw IoError("write failure on ground-truth stream");
    return frames.size();
}

// --- metrics JSON ----------------------------------------------------------------

Metrics read_metrics(std::istream& in) {
    ojson j;
    try {
        j = ojson::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("metrics: ") + e.what());
    }
    auto num = [&](const char* key) {
        auto it = j.find(key);
        if (it == j.end() || !it->is_number()) {
            throw DataError(std::string("metrics: missing numeric key '") + key + "'");
        }
        return it->get<double>();
    };
    Metrics m;
    m.mean_iou = num("mean_iou");
    m.precision = num("precision");
    m.recall = num("recall");
    m.tp = json_int(j, "tp", 1);
    m.fp = json_int(j, "fp", 1);
    m.fn = json_int(j, "fn", 1);
    return m;
}

std::size_t write_metrics(const Metrics& metrics, std::ostream& out) {
    ojson j;
    j["mean_iou"] = metrics.mean_iou;
    j["precision"] = metrics.precision;
    j["recall"] = metrics.recall;
    j["tp"] = metrics.tp;
    j["fp"] = metrics.fp;
    j["fn"] = metrics.fn;
    out << j.dump(2) << '\n';
    if (!out) throw IoError("write failure on metrics stream");
    return 1;
}

// --- file conveniences ------------------------------------------------------------

namespace {
std::ifstream open_or_throw(const std::string& path) {
    std::ifstream f(path);
    if (!f.is_open()) throw IoError("cannot open " + path);
    return f;
}
}  // namespace

EventStream read_events_csv_file(const std::string& path) {
    auto f = open_or_throw(path);
    return read_events_csv(f);
}

std::vector<DetectionRecord> read_detections_file(const std::string& path) {
    auto f = open_or_throw(path);
    return read_detections(f);
}

std::vector<GroundTruthFrame> read_ground_truth_file(const std::string& path) {
    auto f = open_or_throw(path);
    return read_ground_truth(f);
}

}  // namespace evspike
