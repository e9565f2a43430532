#include "evspike/energy.hpp"

#include <algorithm>

namespace evspike {

double snn_energy(std::int64_t m_neurons, std::int64_t c_synapses, double f_rate,
                  const EnergyModel& model) {
    return static_cast<double>(m_neurons) * static_cast<double>(c_synapses) * f_rate * model.e_ac_j;
}

double mac_energy(double num_macs, const EnergyModel& model) { return num_macs * model.e_mac_j; }

OpsReport measure_input_rate(std::span<const Event> stream, const SensorGeometry& geometry,
                             const TimeBase& tb, const EnergyModel& model) {
    geometry.validate();
    tb.validate();
    OpsReport report;
    report.m_neurons = geometry.pixel_count();
    report.c_synapses = 9;
    if (stream.empty()) return report;  // f = 0 over 0 steps

    std::int64_t max_t = stream.front().t_us;
    std::int64_t stimulated = 0;
    for (const Event& e : stream) {
        max_t = std::max(max_t, e.t_us);
        // One synapse fires on every neuron whose 3x3 neighborhood holds this
        // pixel: 9 in the interior, 6 on an edge, 4 in a corner.
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                if (geometry.contains(e.x + dx, e.y + dy)) ++stimulated;
            }
        }
    }
    report.steps = quantize(max_t, tb) + 1;
    const double denom = static_cast<double>(report.m_neurons) *
                         static_cast<double>(report.c_synapses) *
                         static_cast<double>(report.steps);
    report.f_rate = static_cast<double>(stimulated) / denom;
    report.snn_energy_j = snn_energy(report.m_neurons, report.c_synapses, report.f_rate, model);
    return report;
}

}  // namespace evspike
