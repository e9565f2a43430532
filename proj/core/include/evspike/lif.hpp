#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "evspike/events.hpp"

namespace evspike {

// Weights of the 3x3 input neighborhood of one neuron, indexed by the offset
// (dx, dy) = event pixel - neuron pixel with dx, dy in {-1, 0, 1}. Weights are
// non-negative and sum to 1. Neurons at the sensor border simply lose the
// off-sensor taps (zero padding); their kernel is not renormalized.
struct Kernel3x3 {
    std::array<double, 9> w{};

    double at(int dx, int dy) const { return w[static_cast<std::size_t>((dy + 1) * 3 + (dx + 1))]; }
    double& at(int dx, int dy) { return w[static_cast<std::size_t>((dy + 1) * 3 + (dx + 1))]; }
    double sum() const;

    // 0.2 at the center, 0.1 on each of the 8 neighbors.
    static Kernel3x3 standard();
    // Given center weight, spreads the remaining (1 - center) evenly over the
    // 8 neighbors.
    static Kernel3x3 with_center(double center);
};

// How multiple events landing on one pixel within one step contribute:
// kCounts adds the kernel weight once per event, kBinary at most once.
enum class InputMode : std::uint8_t { kCounts, kBinary };

struct LifParams {
    double beta = 0.9;   // per-step membrane leak factor, in (0, 1)
    double u_thr = 1.0;  // spike threshold; strict: a spike requires U > u_thr
    Kernel3x3 kernel = Kernel3x3::standard();
    std::int32_t recovery_radius = 1;    // Chebyshev radius around a spiking neuron
    std::int32_t recovery_lookback = 1;  // extra earlier steps eligible for recovery (0 or 1)
    InputMode input_mode = InputMode::kCounts;

    void validate() const;  // throws ConfigError
};

// Stored potentials this far below any usable threshold snap to zero, so a
// long-idle neuron catches up in a bounded number of multiplications.
inline constexpr double kPotentialFloor = 1e-30;

// One decayed step of membrane potential. Every decay in the library goes
// through this primitive, so event-driven catch-up over k idle steps is
// bit-identical to k explicit per-step decays.
inline double decay_once(double u, double beta) {
    u *= beta;
    return u < kPotentialFloor ? 0.0 : u;
}

// k iterated applications of decay_once (early-out once the value hits zero).
double decay_iterated(double u, double beta, std::int64_t k);

// Closed form beta^k * u. Agrees with decay_iterated to ~1e-12 relative for
// moderate k; exposed so tests can pin the catch-up rule against the formula.
double lazy_decay_equivalence(double u, std::int64_t k_steps, double beta);

struct PixelCoord {
    std::int32_t x = 0;
    std::int32_t y = 0;

    friend auto operator<=>(const PixelCoord&, const PixelCoord&) = default;
};

// Per-pixel membrane state. Potentials are only brought up to date when the
// pixel's neighborhood receives input; last_step records when that happened.
struct MembraneGrid {
    explicit MembraneGrid(const SensorGeometry& g);

    SensorGeometry geometry;
    std::vector<double> potential;       // row-major, width * height
    std::vector<std::int64_t> last_step;

    std::size_t index(std::int32_t x, std::int32_t y) const {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(geometry.width) +
               static_cast<std::size_t>(x);
    }
    double potential_at(std::int32_t x, std::int32_t y) const { return potential[index(x, y)]; }
    std::int64_t last_step_at(std::int32_t x, std::int32_t y) const { return last_step[index(x, y)]; }
};

// Disposition of one input step. The record for step n is finalized one step
// later, once step n+1's spikes are known; that delay is the filter's output
// latency contract.
struct StepOutput {
    std::int64_t step = 0;
    std::vector<PixelCoord> spikes;  // neurons that fired at `step`, row-major order
    std::vector<Event> passed;       // step-n inputs recovered by a spike at n or n+1
    std::vector<Event> residual;     // step-n inputs never recovered

    friend bool operator==(const StepOutput&, const StepOutput&) = default;
};

// Leaky integrate-and-fire update for one completed input step: every neuron
// whose 3x3 neighborhood received input is decayed by beta^(step - last_step),
// accumulates the kernel-weighted event counts, and fires iff U > u_thr
// (strict), resetting to exactly 0. Untouched neurons are not visited.
// Returns the spiking pixels in row-major order.
std::vector<PixelCoord> lif_step(MembraneGrid& grid, std::int64_t step,
                                 std::span<const Event> events_at_step, const LifParams& params);

// Events from the two-step buffer whose pixel lies within Chebyshev distance
// recovery_radius of any spiking neuron. Each buffered event appears at most
// once in the result even if several neurons spike near it; order is buffer
// order, previous step first.
std::vector<Event> recover(std::span<const PixelCoord> spikes, std::span<const Event> events_prev,
                           std::span<const Event> events_curr, std::int32_t recovery_radius);

using StepCallback = std::function<void(const StepOutput&)>;

// Streaming single-branch filter. Feed events in non-decreasing timestamp
// order; finalized StepOutput records are handed to the callback in strictly
// increasing step order. Buffering is bounded by two steps of events.
class LifBranch {
public:
    LifBranch(const SensorGeometry& geometry, const TimeBase& tb, const LifParams& params);

    void feed(const Event& e, const StepCallback& out);
    void finish(const StepCallback& out);

    const MembraneGrid& grid() const { return grid_; }
    const LifParams& params() const { return params_; }
    std::size_t peak_buffered_events() const { return peak_buffered_; }

private:
    struct Slot {
        std::int64_t step = 0;
        std::vector<Event> events;
        std::vector<char> recovered;
        std::vector<PixelCoord> spikes;
        std::unordered_map<std::int64_t, std::vector<std::uint32_t>> by_pixel;
    };

    void append(Slot& slot, const Event& e);
    void advance(std::int64_t next_step, const StepCallback& out);
    void process_and_mark(Slot& slot);
    void mark_around(Slot& slot, const PixelCoord& spike);
    void finalize(Slot& slot, const StepCallback& out);
    void note_buffered();

    SensorGeometry geometry_;
    TimeBase tb_;
    LifParams params_;
    MembraneGrid grid_;
    std::optional<Slot> prev_;
    std::optional<Slot> curr_;
    std::size_t peak_buffered_ = 0;
};

struct BranchResult {
    EventStream passed;    // events recovered by spikes; timestamp-sorted
    EventStream residual;  // everything else; passed + residual = input as multisets
};

// Runs one branch over a whole stream. on_step, when set, observes every
// finalized StepOutput in order.
BranchResult run_branch(std::span<const Event> stream, const TimeBase& tb, const LifParams& params,
                        const SensorGeometry& geometry, const StepCallback& on_step = nullptr);

}  // namespace evspike
