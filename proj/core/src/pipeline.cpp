#include "evspike/pipeline.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <future>
#include <sstream>
#include <unordered_map>

#include "evspike/errors.hpp"
#include "evspike/synthetic.hpp"

namespace evspike {

namespace {

// Multiset key for band subtraction: an event is identified by when, where,
// and which way it flipped.
struct EventKey {
    std::int64_t t_us;
    std::int32_t x;
    std::int32_t y;
    std::uint8_t p;

    friend bool operator==(const EventKey&, const EventKey&) = default;
};

EventKey key_of(const Event& e) {
    return {e.t_us, e.x, e.y, static_cast<std::uint8_t>(e.polarity)};
}

struct EventKeyHash {
    std::size_t operator()(const EventKey& k) const noexcept {
        auto mix = [](std::uint64_t h, std::uint64_t v) {
            h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
            return h;
        };
        std::uint64_t h = static_cast<std::uint64_t>(k.t_us);
        h = mix(h, static_cast<std::uint32_t>(k.x));
        h = mix(h, static_cast<std::uint32_t>(k.y));
        h = mix(h, k.p);
        return static_cast<std::size_t>(h);
    }
};

}  // namespace

void EvalSchedule::validate() const {
    if (interval_us < 0) throw ConfigError("eval interval must be non-negative");
    if (end_us < 0) throw ConfigError("eval end must be non-negative");
    for (std::size_t i = 1; i < timestamps.size(); ++i) {
        if (timestamps[i] <= timestamps[i - 1]) {
            throw ConfigError("eval timestamps must be strictly increasing");
        }
    }
}

void PipelineConfig::validate() const {
    geometry.validate();
    time_base.validate();
    if (branches.empty()) throw ConfigError("at least one speed branch is required");
    for (const SpeedBranchConfig& br : branches) {
        if (!(br.threshold_speed > 0.0) || !std::isfinite(br.threshold_speed)) {
            std::ostringstream msg;
            msg << "branch threshold speed must be positive and finite, got " << br.threshold_speed;
            throw ConfigError(msg.str());
        }
        br.lif.validate();
    }
    for (std::size_t i = 1; i < branches.size(); ++i) {
        if (branches[i].threshold_speed <= branches[i - 1].threshold_speed) {
            std::ostringstream msg;
            msg << "branches must be strictly increasing in threshold_speed ("
                << branches[i - 1].threshold_speed << " followed by " << branches[i].threshold_speed
                << ")";
            throw ConfigError(msg.str());
        }
    }
    dbscan.validate();
    if (min_cluster_size < 0) throw ConfigError("min_cluster_size must be non-negative");
    if (window_us <= 0) throw ConfigError("clustering window must be positive");
    eval.validate();
}

std::vector<std::string> PipelineConfig::regime_warnings() const {
    std::vector<std::string> out;
    if (branches.empty()) return out;
    const SpeedBranchConfig& first = branches.front();
    for (std::size_t i = 1; i < branches.size(); ++i) {
        const LifParams& a = first.lif;
        const LifParams& b = branches[i].lif;
        if (a.u_thr != b.u_thr || a.kernel.w != b.kernel.w ||
            a.recovery_radius != b.recovery_radius || a.recovery_lookback != b.recovery_lookback ||
            a.input_mode != b.input_mode) {
            std::ostringstream msg;
            msg << "branch " << i << " differs from branch 0 in more than beta; band subtraction "
                << "assumes branches share threshold, kernel, and recovery settings";
            out.push_back(msg.str());
            break;
        }
    }
    for (std::size_t i = 1; i < branches.size(); ++i) {
        if (branches[i].lif.beta >= branches[i - 1].lif.beta) {
            std::ostringstream msg;
            msg << "branch " << i << " is tuned to a higher speed than branch " << i - 1
                << " but does not leak faster (beta " << branches[i].lif.beta
                << " >= " << branches[i - 1].lif.beta << "); its passed set will not be a subset";
            out.push_back(msg.str());
        }
    }
    for (std::size_t i = 0; i < branches.size(); ++i) {
        const LifParams& p = branches[i].lif;
        if (p.u_thr >= p.kernel.sum()) {
            std::ostringstream msg;
            msg << "branch " << i << ": threshold " << p.u_thr
                << " is at or above the total kernel weight " << p.kernel.sum()
                << "; a single isolated edge pass can never spike, only compound motion will";
            out.push_back(msg.str());
        }
    }
    return out;
}

EventStream band_difference(std::span<const Event> lower, std::span<const Event> upper) {
    std::unordered_map<EventKey, std::int64_t, EventKeyHash> budget;
    budget.reserve(upper.size());
    for (const Event& e : upper) ++budget[key_of(e)];
    EventStream out;
    for (const Event& e : lower) {
        auto it = budget.find(key_of(e));
        if (it != budget.end() && it->second > 0) {
            --it->second;  // matched one-for-one by the upper branch
        } else {
            out.push_back(e);
        }
    }
    return out;
}

namespace {

// The residual band holds events recovered by NO branch. Branch 0's residual
// is almost that, except that a faster branch occasionally recovers an event
// the slow branch missed (its earlier spike-and-reset can leave it silent at
// the decisive step). Dropping those keeps the residual band disjoint from
// the speed bands and makes band totals conserve the input exactly for one-
// and two-branch configurations; when every faster branch's passed set nests
// inside the slower one's, nothing is dropped at all. Per key, upper branches
// justify dropping (max_k count_k - count_0)+ copies.
EventStream uncovered_residual(const std::vector<Event>& residual0,
                               const std::vector<const std::vector<Event>*>& passed) {
    if (passed.size() <= 1) return residual0;
    std::unordered_map<EventKey, std::int64_t, EventKeyHash> max_upper;
    std::unordered_map<EventKey, std::int64_t, EventKeyHash> per_branch;
    for (std::size_t k = 1; k < passed.size(); ++k) {
        per_branch.clear();
        for (const Event& e : *passed[k]) ++per_branch[key_of(e)];
        for (const auto& [key, count] : per_branch) {
            auto [it, inserted] = max_upper.try_emplace(key, count);
            if (!inserted) it->second = std::max(it->second, count);
        }
    }
    if (max_upper.empty()) return residual0;
    std::unordered_map<EventKey, std::int64_t, EventKeyHash> budget = std::move(max_upper);
    for (const Event& e : *passed[0]) {
        auto it = budget.find(key_of(e));
        if (it != budget.end() && it->second > 0) --it->second;
    }
    EventStream out;
    out.reserve(residual0.size());
    for (const Event& e : residual0) {
        auto it = budget.find(key_of(e));
        if (it != budget.end() && it->second > 0) {
            --it->second;  // covered by a faster branch
        } else {
            out.push_back(e);
        }
    }
    return out;
}

}  // namespace

// --- streaming detector ------------------------------------------------------

struct StreamingDetector::Impl {
    static constexpr std::int64_t kNever = std::numeric_limits<std::int64_t>::max();

    PipelineConfig cfg;
    RecordSink sink;
    bool collect_bands;
    BandEventSink band_sink;

    std::vector<std::unique_ptr<LifBranch>> branches;
    std::vector<StepCallback> taps;               // push into pending[b]
    std::vector<std::deque<StepOutput>> pending;  // zip queues, one per branch
    std::vector<std::int32_t> band_ids;           // emitted bands, ascending
    std::vector<std::deque<Event>> windows;       // per emitted band
    std::vector<BandOutput> collected;

    bool explicit_mode = false;
    std::size_t next_ts = 0;   // into cfg.eval.timestamps
    std::int64_t next_k = 1;   // interval mode multiplier
    std::int64_t last_event_t = 0;
    bool any_event = false;
    bool finished = false;
    std::size_t buffered_now = 0;  // events held in pending step queues + windows
    std::size_t peak_events = 0;

    Impl(const PipelineConfig& config, RecordSink s, bool collect, BandEventSink bands)
        : cfg(config), sink(std::move(s)), collect_bands(collect), band_sink(std::move(bands)) {
        cfg.validate();
        const std::size_t nb = cfg.branches.size();
        pending.resize(nb);
        for (std::size_t b = 0; b < nb; ++b) {
            branches.push_back(
                std::make_unique<LifBranch>(cfg.geometry, cfg.time_base, cfg.branches[b].lif));
            taps.push_back([this, b](const StepOutput& so) {
                buffered_now += so.passed.size() + so.residual.size();
                peak_events = std::max(peak_events, buffered_now);
                pending[b].push_back(so);
            });
        }
        if (cfg.include_residual_band) band_ids.push_back(-1);
        for (std::size_t k = 0; k < nb; ++k) band_ids.push_back(static_cast<std::int32_t>(k));
        windows.resize(band_ids.size());
        for (std::int32_t id : band_ids) {
            BandOutput bo;
            bo.band_index = id;
            if (id < 0) {
                bo.speed_lo = 0.0;
                bo.speed_hi = cfg.branches.front().threshold_speed;
            } else {
                bo.speed_lo = cfg.branches[static_cast<std::size_t>(id)].threshold_speed;
                bo.speed_hi = static_cast<std::size_t>(id) + 1 < nb
                                  ? cfg.branches[static_cast<std::size_t>(id) + 1].threshold_speed
                                  : std::numeric_limits<double>::infinity();
            }
            collected.push_back(std::move(bo));
        }
        explicit_mode = !cfg.eval.timestamps.empty();
    }

    std::int64_t next_eval() const {
        if (explicit_mode) {
            return next_ts < cfg.eval.timestamps.size() ? cfg.eval.timestamps[next_ts] : kNever;
        }
        if (cfg.eval.interval_us <= 0) return kNever;
        return cfg.time_base.t0_us + next_k * cfg.eval.interval_us;
    }

    void pop_eval() {
        if (explicit_mode) {
            ++next_ts;
        } else {
            ++next_k;
        }
    }

    // Interval-mode evaluation never runs past this timestamp. While the
    // stream is still open it can only grow, so gating on it merely delays an
    // evaluation until a later feed (or finish) confirms the schedule reaches
    // it -- exactly the batch rule "intervals end at the last event".
    std::int64_t interval_end() const {
        if (cfg.eval.end_us > 0) return cfg.eval.end_us;
        return any_event ? last_event_t : cfg.time_base.t0_us;
    }

    void feed(const Event& e) {
        if (finished) throw DataError("event fed after finish()");
        if (!cfg.geometry.contains(e.x, e.y)) {
            std::ostringstream msg;
            msg << "event (" << e.x << ", " << e.y << ") outside " << cfg.geometry.width << "x"
                << cfg.geometry.height << " sensor";
            throw DataError(msg.str());
        }
        last_event_t = any_event ? std::max(last_event_t, e.t_us) : e.t_us;
        any_event = true;
        for (std::size_t b = 0; b < branches.size(); ++b) branches[b]->feed(e, taps[b]);
        drain();
    }

    void finish() {
        if (finished) return;
        for (std::size_t b = 0; b < branches.size(); ++b) branches[b]->finish(taps[b]);
        drain();
        // Every event is banded now, so any window is complete; emit whatever
        // the schedule still owes (explicit lists in full, intervals to end).
        if (explicit_mode) {
            while (next_ts < cfg.eval.timestamps.size()) {
                evaluate(cfg.eval.timestamps[next_ts]);
                pop_eval();
                evict();
            }
        } else {
            while (next_eval() != kNever && next_eval() <= interval_end()) {
                evaluate(next_eval());
                pop_eval();
                evict();
            }
        }
        finished = true;
    }

    // Pops complete zipped steps, assigns band events, runs due evaluations.
    void drain() {
        while (true) {
            bool ready = true;
            for (const auto& q : pending) {
                if (q.empty()) {
                    ready = false;
                    break;
                }
            }
            if (!ready) break;

            std::vector<StepOutput> outs;
            outs.reserve(pending.size());
            for (auto& q : pending) {
                buffered_now -= q.front().passed.size() + q.front().residual.size();
                outs.push_back(std::move(q.front()));
                q.pop_front();
            }
            const std::int64_t step = outs.front().step;
            for (const StepOutput& so : outs) {
                assert(so.step == step);
                (void)so;
            }

            std::size_t slot = 0;
            if (cfg.include_residual_band) {
                std::vector<const std::vector<Event>*> passed;
                passed.reserve(outs.size());
                for (const StepOutput& so : outs) passed.push_back(&so.passed);
                integrate(slot++, uncovered_residual(outs.front().residual, passed));
            }
            for (std::size_t k = 0; k < outs.size(); ++k, ++slot) {
                if (k + 1 < outs.size()) {
                    integrate(slot, band_difference(outs[k].passed, outs[k + 1].passed));
                } else {
                    integrate(slot, outs[k].passed);
                }
            }

            // Events of steps <= `step` are all banded, so an eval point
            // quantizing at or below it sees a complete window.
            while (true) {
                const std::int64_t ne = next_eval();
                if (ne == kNever) break;
                if (!explicit_mode && ne > interval_end()) break;
                const bool window_complete =
                    ne < cfg.time_base.t0_us || quantize(ne, cfg.time_base) <= step;
                if (!window_complete) break;
                evaluate(ne);
                pop_eval();
            }
            evict();
        }
    }

    void integrate(std::size_t slot, const std::vector<Event>& events) {
        for (const Event& e : events) {
            windows[slot].push_back(e);
            ++buffered_now;
            if (collect_bands) collected[slot].events.push_back(e);
            if (band_sink) band_sink(band_ids[slot], e);
        }
        peak_events = std::max(peak_events, buffered_now);
    }

    void evaluate(std::int64_t t_f) {
        DetectionRecord rec;
        rec.t_us = t_f;
        const std::int64_t t_lo = t_f - cfg.window_us;
        std::vector<Point2> points;
        for (std::size_t slot = 0; slot < windows.size(); ++slot) {
            points.clear();
            for (const Event& e : windows[slot]) {
                if (e.t_us <= t_lo) continue;
                if (e.t_us > t_f) break;  // deque is time-sorted
                points.push_back({static_cast<double>(e.x), static_cast<double>(e.y)});
            }
            const ClusterLabeling labeling = dbscan(points, cfg.dbscan);
            for (const ClusterBox& cb :
                 cluster_boxes(points, labeling, cfg.effective_min_cluster_size())) {
                rec.boxes.push_back({cb.box, band_ids[slot], cb.size});
            }
        }
        if (sink) sink(rec);
    }

    // Drops events no future window can reach.
    void evict() {
        const std::int64_t upcoming = next_eval();
        const bool no_more_evals =
            upcoming == kNever ||
            (!explicit_mode && cfg.eval.end_us > 0 && upcoming > cfg.eval.end_us);
        if (no_more_evals) {
            for (auto& w : windows) {
                buffered_now -= w.size();
                w.clear();
            }
            return;
        }
        const std::int64_t cutoff = upcoming - cfg.window_us;
        for (auto& w : windows) {
            while (!w.empty() && w.front().t_us <= cutoff) {
                w.pop_front();
                --buffered_now;
            }
        }
    }

    std::size_t peak_buffered() const {
        std::size_t total = peak_events;
        for (const auto& b : branches) total += b->peak_buffered_events();
        return total;
    }
};

StreamingDetector::StreamingDetector(const PipelineConfig& config, RecordSink sink,
                                     bool collect_bands, BandEventSink band_sink)
    : impl_(std::make_unique<Impl>(config, std::move(sink), collect_bands, std::move(band_sink))) {}

StreamingDetector::~StreamingDetector() = default;
StreamingDetector::StreamingDetector(StreamingDetector&&) noexcept = default;
StreamingDetector& StreamingDetector::operator=(StreamingDetector&&) noexcept = default;

void StreamingDetector::feed(const Event& e) { impl_->feed(e); }
void StreamingDetector::finish() { impl_->finish(); }
const std::vector<BandOutput>& StreamingDetector::bands() const { return impl_->collected; }
std::size_t StreamingDetector::peak_buffered_events() const { return impl_->peak_buffered(); }

// --- batch detection ----------------------------------------------------------

DetectOutput detect(std::span<const Event> stream, const PipelineConfig& config) {
    config.validate();
    const ValidationReport report = validate_stream(stream, config.geometry);
    if (!report.ok()) throw DataError(report.violations.front().message);

    const std::size_t nb = config.branches.size();
    std::vector<BranchResult> results(nb);
    auto run_one = [&](std::size_t b) {
        return run_branch(stream, config.time_base, config.branches[b].lif, config.geometry);
    };
    if (config.parallel_branches && nb > 1) {
        std::vector<std::future<BranchResult>> futures;
        futures.reserve(nb);
        for (std::size_t b = 0; b < nb; ++b) {
            futures.push_back(std::async(std::launch::async, run_one, b));
        }
        for (std::size_t b = 0; b < nb; ++b) results[b] = futures[b].get();
    } else {
        for (std::size_t b = 0; b < nb; ++b) results[b] = run_one(b);
    }

    DetectOutput out;
    if (config.include_residual_band) {
        BandOutput bo;
        bo.band_index = -1;
        bo.speed_lo = 0.0;
        bo.speed_hi = config.branches.front().threshold_speed;
        std::vector<const std::vector<Event>*> passed;
        passed.reserve(nb);
        for (const BranchResult& r : results) passed.push_back(&r.passed);
        bo.events = uncovered_residual(results.front().residual, passed);
        out.bands.push_back(std::move(bo));
    }
    for (std::size_t k = 0; k < nb; ++k) {
        BandOutput bo;
        bo.band_index = static_cast<std::int32_t>(k);
        bo.speed_lo = config.branches[k].threshold_speed;
        bo.speed_hi = k + 1 < nb ? config.branches[k + 1].threshold_speed
                                 : std::numeric_limits<double>::infinity();
        bo.events = k + 1 < nb ? band_difference(results[k].passed, results[k + 1].passed)
                               : std::move(results[k].passed);
        out.bands.push_back(std::move(bo));
    }

    std::vector<std::int64_t> eval_times = config.eval.timestamps;
    if (eval_times.empty() && config.eval.interval_us > 0) {
        const std::int64_t end = config.eval.end_us > 0
                                     ? config.eval.end_us
                                     : (stream.empty() ? config.time_base.t0_us : stream.back().t_us);
        for (std::int64_t t = config.time_base.t0_us + config.eval.interval_us; t <= end;
             t += config.eval.interval_us) {
            eval_times.push_back(t);
        }
    }

    std::vector<Point2> points;
    for (const std::int64_t t_f : eval_times) {
        DetectionRecord rec;
        rec.t_us = t_f;
        for (const BandOutput& band : out.bands) {
            // Trailing window (t_f - window, t_f]; band streams are time-sorted.
            auto lo = std::partition_point(
                band.events.begin(), band.events.end(),
                [&](const Event& e) { return e.t_us <= t_f - config.window_us; });
            auto hi = std::partition_point(lo, band.events.end(),
                                           [&](const Event& e) { return e.t_us <= t_f; });
            points.clear();
            for (auto it = lo; it != hi; ++it) {
                points.push_back({static_cast<double>(it->x), static_cast<double>(it->y)});
            }
            const ClusterLabeling labeling = dbscan(points, config.dbscan);
            for (const ClusterBox& cb :
                 cluster_boxes(points, labeling, config.effective_min_cluster_size())) {
                rec.boxes.push_back({cb.box, band.band_index, cb.size});
            }
        }
        out.records.push_back(std::move(rec));
    }
    return out;
}

// --- calibration ----------------------------------------------------------------

CalibrationResult calibrate_branch(double target_speed, const TimeBase& tb,
                                   const SensorGeometry& geometry, double u_thr) {
    tb.validate();
    geometry.validate();
    if (!(target_speed > 0.0) || !std::isfinite(target_speed)) {
        std::ostringstream msg;
        msg << "calibration target speed must be positive and finite, got " << target_speed;
        throw ConfigError(msg.str());
    }
    if (!(u_thr > 0.0) || !std::isfinite(u_thr)) {
        throw ConfigError("calibration threshold must be positive and finite");
    }
    if (geometry.width < 12 || geometry.height < 4) {
        std::ostringstream msg;
        msg << "sensor too small to calibrate (need at least 12x4, got " << geometry.width << "x"
            << geometry.height << ")";
        throw ConfigError(msg.str());
    }

    // Probe: a solid vertical bar swept horizontally across a fixed distance.
    const std::int32_t probe_w = 4;
    std::int32_t probe_h =
        static_cast<std::int32_t>(std::min<std::int64_t>(64, geometry.height - 8));
    probe_h = std::max(probe_h, 4);
    const std::int32_t probe_x0 = 2;
    const std::int32_t probe_y0 = (geometry.height - probe_h) / 2;
    const std::int64_t distance =
        std::min<std::int64_t>(geometry.width - probe_w - 6, 256);  // pixels of travel

    const TimeBase probe_tb{0, tb.dt_us};
    auto probe_events = [&](double speed) {
        SceneSpec scene;
        scene.geometry = geometry;
        scene.gen_dt_us = tb.dt_us;
        scene.duration_us =
            static_cast<std::int64_t>(std::llround(static_cast<double>(distance) / speed * 1e6)) +
            tb.dt_us;
        scene.frame_interval_us = scene.duration_us;
        scene.objects = {{1, static_cast<double>(probe_x0), static_cast<double>(probe_y0), probe_w,
                          probe_h, speed, 0.0, MovingObjectSpec::Fill::kSolid}};
        return strip_labels(generate(scene).events);
    };
    const EventStream fast_ev = probe_events(target_speed);
    const EventStream slow_ev = probe_events(target_speed / 2.0);

    LifParams base;
    base.u_thr = u_thr;
    auto spike_fraction = [&](const EventStream& ev, double beta) {
        LifParams p = base;
        p.beta = beta;
        std::int64_t steps = 0;
        std::int64_t spike_steps = 0;
        run_branch(ev, probe_tb, p, geometry, [&](const StepOutput& so) {
            ++steps;
            if (!so.spikes.empty()) ++spike_steps;
        });
        return steps > 0 ? static_cast<double>(spike_steps) / static_cast<double>(steps) : 0.0;
    };

    constexpr double kBetaLo = 0.05;
    constexpr double kBetaHi = 0.995;
    constexpr double kFastNeed = 0.5;  // spike in at least half the emitting steps at speed
    constexpr double kSlowCap = 0.05;  // nearly silent at half speed
    auto fast_ok = [&](double b) { return spike_fraction(fast_ev, b) >= kFastNeed; };
    auto slow_ok = [&](double b) { return spike_fraction(slow_ev, b) <= kSlowCap; };

    if (!fast_ok(kBetaHi)) {
        std::ostringstream msg;
        msg << "calibration failed for " << target_speed << " px/s at threshold " << u_thr
            << ": even beta " << kBetaHi << " spikes in only a " << spike_fraction(fast_ev, kBetaHi)
            << " fraction of steps at the target speed (need >= " << kFastNeed << ")";
        throw DataError(msg.str());
    }
    if (!slow_ok(kBetaLo)) {
        std::ostringstream msg;
        msg << "calibration failed for " << target_speed << " px/s at threshold " << u_thr
            << ": even beta " << kBetaLo << " spikes in a " << spike_fraction(slow_ev, kBetaLo)
            << " fraction of steps at half speed (cap " << kSlowCap << ")";
        throw DataError(msg.str());
    }

    double beta_fast = kBetaLo;  // smallest beta that satisfies the target-speed criterion
    if (!fast_ok(kBetaLo)) {
        double lo = kBetaLo, hi = kBetaHi;
        while (hi - lo > 1e-4) {
            const double mid = 0.5 * (lo + hi);
            (fast_ok(mid) ? hi : lo) = mid;
        }
        beta_fast = hi;
    }
    double beta_slow = kBetaHi;  // largest beta that stays quiet at half speed
    if (!slow_ok(kBetaHi)) {
        double lo = kBetaLo, hi = kBetaHi;
        while (hi - lo > 1e-4) {
            const double mid = 0.5 * (lo + hi);
            (slow_ok(mid) ? lo : hi) = mid;
        }
        beta_slow = lo;
    }

    if (beta_fast > beta_slow) {
        std::ostringstream msg;
        msg << "calibration failed for " << target_speed << " px/s at threshold " << u_thr
            << ": no leak factor separates the speeds (target needs beta >= " << beta_fast
            << " where the half-speed fraction is " << spike_fraction(slow_ev, beta_fast)
            << "; half speed needs beta <= " << beta_slow << " where the target fraction is "
            << spike_fraction(fast_ev, beta_slow) << ")";
        throw DataError(msg.str());
    }

    CalibrationResult result;
    result.params = base;
    result.params.beta = 0.5 * (beta_fast + beta_slow);
    result.beta_lo = beta_fast;
    result.beta_hi = beta_slow;
    result.fast_fraction = spike_fraction(fast_ev, result.params.beta);
    result.slow_fraction = spike_fraction(slow_ev, result.params.beta);
    if (result.fast_fraction < kFastNeed || result.slow_fraction > kSlowCap) {
        std::ostringstream msg;
        msg << "calibration unstable for " << target_speed << " px/s at threshold " << u_thr
            << ": midpoint beta " << result.params.beta << " measures fast fraction "
            << result.fast_fraction << " and half-speed fraction " << result.slow_fraction;
        throw DataError(msg.str());
    }
    return result;
}

}  // namespace evspike
