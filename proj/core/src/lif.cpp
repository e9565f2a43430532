#include "evspike/lif.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>
#include <utility>

#include "evspike/errors.hpp"

namespace evspike {

double Kernel3x3::sum() const {
    double s = 0.0;
    for (double v : w) s += v;
    return s;
}

Kernel3x3 Kernel3x3::standard() { return with_center(0.2); }

Kernel3x3 Kernel3x3::with_center(double center) {
    Kernel3x3 k;
    const double rest = (1.0 - center) / 8.0;
    k.w.fill(rest);
    k.at(0, 0) = center;
    return k;
}

void LifParams::validate() const {
    if (!(beta > 0.0) || !(beta < 1.0)) {
        std::ostringstream msg;
        msg << "leak factor beta must be in (0, 1), got " << beta;
        throw ConfigError(msg.str());
    }
    if (!(u_thr > 0.0) || !std::isfinite(u_thr)) {
        std::ostringstream msg;
        msg << "spike threshold must be positive and finite, got " << u_thr;
        throw ConfigError(msg.str());
    }
    for (double v : kernel.w) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw ConfigError("kernel weights must be non-negative and finite");
        }
    }
    const double s = kernel.sum();
    if (std::abs(s - 1.0) > 1e-9) {
        std::ostringstream msg;
        msg << "kernel weights must sum to 1 (got " << s << ")";
        throw ConfigError(msg.str());
    }
    if (recovery_radius < 0) throw ConfigError("recovery radius must be non-negative");
    if (recovery_lookback != 0 && recovery_lookback != 1) {
        throw ConfigError("recovery lookback must be 0 or 1");
    }
}

double decay_iterated(double u, double beta, std::int64_t k) {
    for (std::int64_t i = 0; i < k && u != 0.0; ++i) u = decay_once(u, beta);
    return u;
}

double lazy_decay_equivalence(double u, std::int64_t k_steps, double beta) {
    return std::pow(beta, static_cast<double>(k_steps)) * u;
}

MembraneGrid::MembraneGrid(const SensorGeometry& g) : geometry(g) {
    g.validate();
    const auto n = static_cast<std::size_t>(g.pixel_count());
    potential.assign(n, 0.0);
    last_step.assign(n, 0);
}

std::vector<PixelCoord> lif_step(MembraneGrid& grid, std::int64_t step,
                                 std::span<const Event> events_at_step, const LifParams& params) {
    const SensorGeometry& g = grid.geometry;

    // Binary mode: each pixel contributes at most once per step, first event wins.
    std::vector<Event> deduped;
    std::span<const Event> events = events_at_step;
    if (params.input_mode == InputMode::kBinary) {
        std::unordered_set<std::int64_t> seen;
        deduped.reserve(events_at_step.size());
        for (const Event& e : events_at_step) {
            if (seen.insert(static_cast<std::int64_t>(e.y) * g.width + e.x).second) {
                deduped.push_back(e);
            }
        }
        events = deduped;
    }

    // (neuron, weight) contributions in event-major, offset-minor order. The
    // stable sort keeps that order within each neuron, which pins the
    // floating-point addition order for reproducibility.
    std::vector<std::pair<std::size_t, double>> entries;
    entries.reserve(events.size() * 9);
    for (const Event& e : events) {
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                const std::int32_t nx = e.x - dx;
                const std::int32_t ny = e.y - dy;
                if (g.contains(nx, ny)) {
                    entries.emplace_back(grid.index(nx, ny), params.kernel.at(dx, dy));
                }
            }
        }
    }
    std::stable_sort(entries.begin(), entries.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });

    std::vector<PixelCoord> spikes;
    std::size_t i = 0;
    while (i < entries.size()) {
        const std::size_t idx = entries[i].first;
        double add = 0.0;
        std::size_t j = i;
        for (; j < entries.size() && entries[j].first == idx; ++j) add += entries[j].second;
        i = j;

        const std::int64_t elapsed = step - grid.last_step[idx];
        double u = decay_iterated(grid.potential[idx], params.beta, elapsed);
        u += add;
        grid.last_step[idx] = step;
        if (u > params.u_thr) {  // strict: landing exactly on the threshold holds
            spikes.push_back({static_cast<std::int32_t>(idx % static_cast<std::size_t>(g.width)),
                              static_cast<std::int32_t>(idx / static_cast<std::size_t>(g.width))});
            u = 0.0;
        }
        grid.potential[idx] = u;
    }
    return spikes;  // ascending neuron index == row-major order
}

namespace {

inline bool near_any(const Event& e, std::span<const PixelCoord> spikes, std::int32_t r) {
    for (const PixelCoord& s : spikes) {
        if (std::abs(e.x - s.x) <= r && std::abs(e.y - s.y) <= r) return true;
    }
    return false;
}

}  // namespace

std::vector<Event> recover(std::span<const PixelCoord> spikes, std::span<const Event> events_prev,
                           std::span<const Event> events_curr, std::int32_t recovery_radius) {
    std::vector<Event> out;
    if (spikes.empty()) return out;

    const std::int64_t probe_area =
        (2 * static_cast<std::int64_t>(recovery_radius) + 1) *
        (2 * static_cast<std::int64_t>(recovery_radius) + 1);
    if (probe_area <= static_cast<std::int64_t>(spikes.size())) {
        // Few distinct probes per event: hash the spike pixels instead.
        std::unordered_set<std::int64_t> spike_px;
        spike_px.reserve(spikes.size());
        for (const PixelCoord& s : spikes) {
            spike_px.insert((static_cast<std::int64_t>(s.x) << 32) ^
                            static_cast<std::uint32_t>(s.y));
        }
        auto hit = [&](const Event& e) {
            for (std::int32_t dy = -recovery_radius; dy <= recovery_radius; ++dy) {
                for (std::int32_t dx = -recovery_radius; dx <= recovery_radius; ++dx) {
                    if (spike_px.count((static_cast<std::int64_t>(e.x + dx) << 32) ^
                                       static_cast<std::uint32_t>(e.y + dy))) {
                        return true;
                    }
                }
            }
            return false;
        };
        for (const Event& e : events_prev) {
            if (hit(e)) out.push_back(e);
        }
        for (const Event& e : events_curr) {
            if (hit(e)) out.push_back(e);
        }
        return out;
    }

    for (const Event& e : events_prev) {
        if (near_any(e, spikes, recovery_radius)) out.push_back(e);
    }
    for (const Event& e : events_curr) {
        if (near_any(e, spikes, recovery_radius)) out.push_back(e);
    }
    return out;
}

LifBranch::LifBranch(const SensorGeometry& geometry, const TimeBase& tb, const LifParams& params)
    : geometry_(geometry), tb_(tb), params_(params), grid_(geometry) {
    tb_.validate();
    params_.validate();
}

void LifBranch::append(Slot& slot, const Event& e) {
    const auto idx = static_cast<std::uint32_t>(slot.events.size());
    slot.events.push_back(e);
    slot.recovered.push_back(0);
    slot.by_pixel[static_cast<std::int64_t>(e.y) * geometry_.width + e.x].push_back(idx);
    note_buffered();
}

void LifBranch::feed(const Event& e, const StepCallback& out) {
    if (!geometry_.contains(e.x, e.y)) {
        std::ostringstream msg;
        msg << "event (" << e.x << ", " << e.y << ") outside " << geometry_.width << "x"
            << geometry_.height << " sensor";
        throw DataError(msg.str());
    }
    const std::int64_t step = quantize(e.t_us, tb_);
    if (!curr_) {
        curr_.emplace();
        curr_->step = step;
    } else if (step < curr_->step) {
        std::ostringstream msg;
        msg << "timestamp regression: step " << step << " after step " << curr_->step;
        throw DataError(msg.str());
    } else if (step > curr_->step) {
        advance(step, out);
    }
    append(*curr_, e);
}

void LifBranch::advance(std::int64_t next_step, const StepCallback& out) {
    process_and_mark(*curr_);
    if (prev_) finalize(*prev_, out);
    prev_ = std::move(*curr_);
    curr_.reset();
    if (next_step > prev_->step + 1) {
        // Nothing can spike in the empty step after prev_, so its fate is
        // already sealed.
        finalize(*prev_, out);
        prev_.reset();
    }
    curr_.emplace();
    curr_->step = next_step;
}

void LifBranch::process_and_mark(Slot& slot) {
    slot.spikes = lif_step(grid_, slot.step, slot.events, params_);
    for (const PixelCoord& s : slot.spikes) {
        mark_around(slot, s);
        if (params_.recovery_lookback >= 1 && prev_) mark_around(*prev_, s);
    }
}

void LifBranch::mark_around(Slot& slot, const PixelCoord& spike) {
    const std::int32_t r = params_.recovery_radius;
    const std::int64_t probe_area = (2 * static_cast<std::int64_t>(r) + 1) *
                                    (2 * static_cast<std::int64_t>(r) + 1);
    if (probe_area > static_cast<std::int64_t>(slot.events.size())) {
        for (std::size_t i = 0; i < slot.events.size(); ++i) {
            const Event& e = slot.events[i];
            if (std::abs(e.x - spike.x) <= r && std::abs(e.y - spike.y) <= r) {
                slot.recovered[i] = 1;
            }
        }
        return;
    }
    for (std::int32_t dy = -r; dy <= r; ++dy) {
        for (std::int32_t dx = -r; dx <= r; ++dx) {
            const std::int32_t px = spike.x + dx;
            const std::int32_t py = spike.y + dy;
            if (!geometry_.contains(px, py)) continue;
            auto it = slot.by_pixel.find(static_cast<std::int64_t>(py) * geometry_.width + px);
            if (it == slot.by_pixel.end()) continue;
            for (std::uint32_t i : it->second) slot.recovered[i] = 1;
        }
    }
}

void LifBranch::finalize(Slot& slot, const StepCallback& out) {
    StepOutput so;
    so.step = slot.step;
    so.spikes = std::move(slot.spikes);
    for (std::size_t i = 0; i < slot.events.size(); ++i) {
        (slot.recovered[i] ? so.passed : so.residual).push_back(slot.events[i]);
    }
    if (out) out(so);
}

void LifBranch::note_buffered() {
    const std::size_t current =
        (prev_ ? prev_->events.size() : 0) + (curr_ ? curr_->events.size() : 0);
    peak_buffered_ = std::max(peak_buffered_, current);
}

void LifBranch::finish(const StepCallback& out) {
    if (!curr_) return;
    process_and_mark(*curr_);
    if (prev_) finalize(*prev_, out);
    finalize(*curr_, out);
    prev_.reset();
    curr_.reset();
}

BranchResult run_branch(std::span<const Event> stream, const TimeBase& tb, const LifParams& params,
                        const SensorGeometry& geometry, const StepCallback& on_step) {
    LifBranch branch(geometry, tb, params);
    BranchResult result;
    StepCallback sink = [&](const StepOutput& so) {
        result.passed.insert(result.passed.end(), so.passed.begin(), so.passed.end());
        result.residual.insert(result.residual.end(), so.residual.begin(), so.residual.end());
        if (on_step) on_step(so);
    };
    for (const Event& e : stream) branch.feed(e, sink);
    branch.finish(sink);
    return result;
}

}  // namespace evspike
