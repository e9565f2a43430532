#pragma once

#include <cstdint>
#include <span>

#include "evspike/events.hpp"

namespace evspike {

// Per-operation energies for 32-bit float arithmetic in a 45 nm process.
struct EnergyModel {
    double e_ac_j = 0.9e-12;   // one accumulate
    double e_mac_j = 4.6e-12;  // one multiply-accumulate
};

// Energy of a spiking layer: m neurons, c synapses per neuron, input rate f
// (mean fraction of synapses stimulated per step). Linear in each argument.
double snn_energy(std::int64_t m_neurons, std::int64_t c_synapses, double f_rate,
                  const EnergyModel& model = {});

// Energy of a conventional network doing num_macs multiply-accumulates.
double mac_energy(double num_macs, const EnergyModel& model = {});

struct OpsReport {
    std::int64_t m_neurons = 0;
    std::int64_t c_synapses = 0;
    double f_rate = 0.0;
    std::int64_t steps = 0;
    double snn_energy_j = 0.0;
};

// Measures the input rate of a stream on a sensor-sized layer: every event
// stimulates one synapse of each neuron whose 3x3 neighborhood contains it
// (9 interior, fewer at the border), and f is the stimulated count divided by
// m * c * steps. An empty stream reports f = 0 over 0 steps.
OpsReport measure_input_rate(std::span<const Event> stream, const SensorGeometry& geometry,
                             const TimeBase& tb, const EnergyModel& model = {});

// Published reference workload: a 346x260 sensor layer at the reported input
// rate next to a 9.58e9-MAC conventional detector.
struct ReferenceWorkload {
    std::int64_t m_neurons = 89960;  // 346 * 260
    std::int64_t c_synapses = 9;
    double f_rate = 0.0151;
    double detector_macs = 9.58e9;
};

}  // namespace evspike
