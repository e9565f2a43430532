#include "evspike/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "evspike/errors.hpp"

namespace evspike {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

[[noreturn]] void fail(const std::string& origin, std::size_t line, const std::string& message) {
    std::ostringstream msg;
    msg << origin << ":" << line << ": " << message;
    throw ConfigError(msg.str());
}

// Typed access to one [section] instance; tracks which keys were read so that
// leftovers can be reported as unknown.
class SectionReader {
public:
    SectionReader(const IniSection& sec, const std::string& origin) : sec_(sec), origin_(origin) {}

    const IniEntry* find(const std::string& key) {
        const IniEntry* found = nullptr;
        for (const IniEntry& e : sec_.entries) {
            if (e.key != key) continue;
            if (found) fail(origin_, e.line, "duplicate key '" + key + "' in [" + sec_.name + "]");
            found = &e;
        }
        if (found) used_.insert(key);
        return found;
    }

    std::int64_t required_i64(const std::string& key) { return parse_i64(require(key)); }
    std::int64_t optional_i64(const std::string& key, std::int64_t def) {
        const IniEntry* e = find(key);
        return e ? parse_i64(*e) : def;
    }
    std::int32_t required_i32(const std::string& key) { return narrow(require(key)); }
    std::int32_t optional_i32(const std::string& key, std::int32_t def) {
        const IniEntry* e = find(key);
        return e ? narrow(*e) : def;
    }
    std::uint64_t optional_u64(const std::string& key, std::uint64_t def) {
        const IniEntry* e = find(key);
        if (!e) return def;
        std::uint64_t v = 0;
        auto sv = std::string_view(e->value);
        auto [p, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), v);
        if (ec != std::errc() || p != sv.data() + sv.size()) {
            fail(origin_, e->line, "key '" + key + "': expected unsigned integer, got '" + e->value + "'");
        }
        return v;
    }
    double required_f64(const std::string& key) { return parse_f64(require(key)); }
    double optional_f64(const std::string& key, double def) {
        const IniEntry* e = find(key);
        return e ? parse_f64(*e) : def;
    }
    bool optional_bool(const std::string& key, bool def) {
        const IniEntry* e = find(key);
        if (!e) return def;
        std::string v = e->value;
        std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
        if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
        if (v == "false" || v == "0" || v == "no" || v == "off") return false;
        fail(origin_, e->line, "key '" + key + "': expected a boolean, got '" + e->value + "'");
    }
    std::string optional_string(const std::string& key, const std::string& def) {
        const IniEntry* e = find(key);
        return e ? e->value : def;
    }

    std::vector<std::int64_t> optional_i64_list(const std::string& key) {
        const IniEntry* e = find(key);
        std::vector<std::int64_t> out;
        if (!e) return out;
        std::string_view rest(e->value);
        while (!rest.empty()) {
            const std::size_t comma = rest.find(',');
            std::string_view field = trim(rest.substr(0, comma));
            if (field.empty()) fail(origin_, e->line, "key '" + key + "': empty list element");
            std::int64_t v = 0;
            auto [p, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
            if (ec != std::errc() || p != field.data() + field.size()) {
                fail(origin_, e->line,
                     "key '" + key + "': expected integer list element, got '" + std::string(field) + "'");
            }
            out.push_back(v);
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
        return out;
    }

    void finish() const {
        for (const IniEntry& e : sec_.entries) {
            if (!used_.count(e.key)) {
                fail(origin_, e.line, "unknown key '" + e.key + "' in [" + sec_.name + "]");
            }
        }
    }

    const IniSection& section() const { return sec_; }
    const std::string& origin() const { return origin_; }

private:
    const IniEntry& require(const std::string& key) {
        const IniEntry* e = find(key);
        if (!e) fail(origin_, sec_.line, "[" + sec_.name + "] is missing required key '" + key + "'");
        return *e;
    }

    std::int64_t parse_i64(const IniEntry& e) {
        std::int64_t v = 0;
        auto sv = std::string_view(e.value);
        auto [p, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), v);
        if (ec != std::errc() || p != sv.data() + sv.size()) {
            fail(origin_, e.line, "key '" + e.key + "': expected integer, got '" + e.value + "'");
        }
        return v;
    }

    std::int32_t narrow(const IniEntry& e) {
        const std::int64_t v = parse_i64(e);
        if (v < std::numeric_limits<std::int32_t>::min() ||
            v > std::numeric_limits<std::int32_t>::max()) {
            fail(origin_, e.line, "key '" + e.key + "': value out of 32-bit range");
        }
        return static_cast<std::int32_t>(v);
    }

    double parse_f64(const IniEntry& e) {
        auto sv = std::string_view(e.value);
        double v = 0.0;
        auto [p, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), v);
        if (ec != std::errc() || p != sv.data() + sv.size()) {
            fail(origin_, e.line, "key '" + e.key + "': expected number, got '" + e.value + "'");
        }
        return v;
    }

    const IniSection& sec_;
    const std::string& origin_;
    std::set<std::string> used_;
};

}  // namespace

const std::string* IniSection::find(const std::string& key) const {
    for (const IniEntry& e : entries) {
        if (e.key == key) return &e.value;
    }
    return nullptr;
}

std::vector<IniSection> parse_ini(std::istream& in, const std::string& origin) {
    std::vector<IniSection> out;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view sv(raw);
        if (!sv.empty() && sv.back() == '\r') sv.remove_suffix(1);
        sv = trim(sv);
        if (sv.empty() || sv.front() == '#' || sv.front() == ';') continue;
        if (sv.front() == '[') {
            if (sv.back() != ']') fail(origin, line_no, "unterminated [section] header");
            std::string name(trim(sv.substr(1, sv.size() - 2)));
            if (name.empty()) fail(origin, line_no, "empty [section] name");
            out.push_back({std::move(name), line_no, {}});
            continue;
        }
        const std::size_t eq = sv.find('=');
        if (eq == std::string_view::npos) fail(origin, line_no, "expected 'key = value'");
        std::string key(trim(sv.substr(0, eq)));
        std::string value(trim(sv.substr(eq + 1)));
        if (key.empty()) fail(origin, line_no, "empty key");
        if (out.empty()) fail(origin, line_no, "key '" + key + "' appears before any [section]");
        out.back().entries.push_back({std::move(key), std::move(value), line_no});
    }
    if (in.bad()) throw IoError("read failure while parsing " + origin);
    return out;
}

namespace {

InputMode parse_input_mode(SectionReader& r, const std::string& key) {
    const std::string v = r.optional_string(key, "counts");
    if (v == "counts") return InputMode::kCounts;
    if (v == "binary") return InputMode::kBinary;
    fail(r.origin(), r.section().line, "key '" + key + "': expected 'counts' or 'binary', got '" + v + "'");
}

}  // namespace

PipelineConfig load_pipeline_config(std::istream& in, const std::string& origin) {
    const auto sections = parse_ini(in, origin);
    PipelineConfig cfg;
    const IniSection* geometry = nullptr;
    const IniSection* time_base = nullptr;
    const IniSection* dbs = nullptr;
    const IniSection* window = nullptr;
    const IniSection* run = nullptr;
    std::vector<const IniSection*> branches;

    auto claim_single = [&](const IniSection*& slot, const IniSection& sec) {
        if (slot) fail(origin, sec.line, "section [" + sec.name + "] appears more than once");
        slot = &sec;
    };
    for (const IniSection& sec : sections) {
        if (sec.name == "geometry") claim_single(geometry, sec);
        else if (sec.name == "time_base") claim_single(time_base, sec);
        else if (sec.name == "branch") branches.push_back(&sec);
        else if (sec.name == "dbscan") claim_single(dbs, sec);
        else if (sec.name == "window") claim_single(window, sec);
        else if (sec.name == "run") claim_single(run, sec);
        else fail(origin, sec.line, "unknown section [" + sec.name + "]");
    }
    if (!geometry) fail(origin, 1, "missing required section [geometry]");
    if (branches.empty()) fail(origin, 1, "at least one [branch] section is required");

    {
        SectionReader r(*geometry, origin);
        cfg.geometry.width = r.required_i32("width");
        cfg.geometry.height = r.required_i32("height");
        r.finish();
    }
    if (time_base) {
        SectionReader r(*time_base, origin);
        cfg.time_base.t0_us = r.optional_i64("t0_us", 0);
        cfg.time_base.dt_us = r.optional_i64("dt_us", 1000);
        r.finish();
    }
    for (std::size_t i = 0; i < branches.size(); ++i) {
        SectionReader r(*branches[i], origin);
        SpeedBranchConfig br;
        br.band_index = static_cast<std::int32_t>(i);
        br.threshold_speed = r.required_f64("threshold_speed");
        br.lif.beta = r.required_f64("beta");
        br.lif.u_thr = r.optional_f64("u_thr", 1.0);
        br.lif.kernel = Kernel3x3::with_center(r.optional_f64("center_weight", 0.2));
        br.lif.recovery_radius = r.optional_i32("recovery_radius", 1);
        br.lif.recovery_lookback = r.optional_i32("recovery_lookback", 1);
        br.lif.input_mode = parse_input_mode(r, "input_mode");
        r.finish();
        cfg.branches.push_back(br);
    }
    if (dbs) {
        SectionReader r(*dbs, origin);
        cfg.dbscan.eps = r.optional_f64("eps", 5.0);
        cfg.dbscan.min_pts = r.optional_i32("min_pts", 10);
        r.finish();
    }
    if (window) {
        SectionReader r(*window, origin);
        cfg.window_us = r.optional_i64("window_us", 33000);
        cfg.min_cluster_size = r.optional_i32("min_cluster_size", 0);
        r.finish();
    }
    if (run) {
        SectionReader r(*run, origin);
        cfg.eval.interval_us = r.optional_i64("eval_interval_us", 0);
        cfg.eval.end_us = r.optional_i64("eval_end_us", 0);
        cfg.eval.timestamps = r.optional_i64_list("eval_timestamps");
        cfg.include_residual_band = r.optional_bool("include_residual_band", false);
        cfg.parallel_branches = r.optional_bool("parallel_branches", false);
        r.finish();
    }
    try {
        cfg.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(origin + ": " + e.what());
    }
    return cfg;
}

SceneSpec load_scene_config(std::istream& in, const std::string& origin) {
    const auto sections = parse_ini(in, origin);
    SceneSpec spec;
    const IniSection* scene = nullptr;
    for (const IniSection& sec : sections) {
        if (sec.name == "scene") {
            if (scene) fail(origin, sec.line, "section [scene] appears more than once");
            scene = &sec;
        } else if (sec.name != "object" && sec.name != "static_region") {
            fail(origin, sec.line, "unknown section [" + sec.name + "]");
        }
    }
    if (!scene) fail(origin, 1, "missing required section [scene]");
    {
        SectionReader r(*scene, origin);
        spec.geometry.width = r.required_i32("width");
        spec.geometry.height = r.required_i32("height");
        spec.duration_us = r.required_i64("duration_us");
        spec.gen_dt_us = r.optional_i64("gen_dt_us", 1000);
        spec.noise_rate_hz_per_pixel = r.optional_f64("noise_rate_hz_per_pixel", 0.0);
        spec.static_rate_hz_per_pixel = r.optional_f64("static_rate_hz_per_pixel", 0.0);
        spec.frame_interval_us = r.optional_i64("frame_interval_us", 33000);
        spec.rng_seed = r.optional_u64("rng_seed", 0);
        r.finish();
    }
    std::int64_t next_id = 1;
    for (const IniSection& sec : sections) {
        if (sec.name == "object") {
            SectionReader r(sec, origin);
            MovingObjectSpec o;
            o.object_id = r.optional_i64("object_id", next_id);
            o.x0 = r.required_f64("x0");
            o.y0 = r.required_f64("y0");
            o.width = r.required_i32("width");
            o.height = r.required_i32("height");
            o.vx = r.optional_f64("vx", 0.0);
            o.vy = r.optional_f64("vy", 0.0);
            const std::string fill = r.optional_string("fill", "solid");
            if (fill == "solid") o.fill = MovingObjectSpec::Fill::kSolid;
            else if (fill == "outline") o.fill = MovingObjectSpec::Fill::kOutline;
            else fail(origin, sec.line, "key 'fill': expected 'solid' or 'outline', got '" + fill + "'");
            r.finish();
            spec.objects.push_back(o);
            ++next_id;
        } else if (sec.name == "static_region") {
            SectionReader r(sec, origin);
            StaticRegion region;
            region.box.x_min = r.required_i32("x_min");
            region.box.y_min = r.required_i32("y_min");
            region.box.x_max = r.required_i32("x_max");
            region.box.y_max = r.required_i32("y_max");
            r.finish();
            spec.static_regions.push_back(region);
        }
    }
    try {
        spec.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(origin + ": " + e.what());
    }
    return spec;
}

namespace {
std::ifstream open_config(const std::string& path) {
    std::ifstream f(path);
    if (!f.is_open()) throw IoError("cannot open " + path);
    return f;
}
}  // namespace

PipelineConfig load_pipeline_config_file(const std::string& path) {
    auto f = open_config(path);
    return load_pipeline_config(f, path);
}

SceneSpec load_scene_config_file(const std::string& path) {
    auto f = open_config(path);
    return load_scene_config(f, path);
}

}  // namespace evspike
