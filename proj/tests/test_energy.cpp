#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "evspike/energy.hpp"

using namespace evspike;

TEST_CASE("reference workload energies match the published figures") {
    const ReferenceWorkload w;
    CHECK(w.m_neurons == 346 * 260);
    // 89960 * 9 * 0.0151 * 0.9e-12 J = 1.1003011...e-8 J = 11.003 nJ.
    const double snn = snn_energy(w.m_neurons, w.c_synapses, w.f_rate);
    CHECK(snn == doctest::Approx(11.03e-9).epsilon(0.005));
    CHECK(snn == doctest::Approx(89960.0 * 9.0 * 0.0151 * 0.9e-12).epsilon(1e-15));
    // 9.58e9 * 4.6e-12 J = 4.4068e-2 J = 44.068 mJ.
    const double mac = mac_energy(w.detector_macs);
    CHECK(mac == doctest::Approx(44.06e-3).epsilon(0.001));
    CHECK(mac == doctest::Approx(9.58e9 * 4.6e-12).epsilon(1e-15));
    // The spiking layer is about four million times cheaper here.
    CHECK(mac / snn > 1e6);
}

TEST_CASE("energies are linear in every argument") {
    const EnergyModel model;
    const double base = snn_energy(1000, 9, 0.02, model);
    CHECK(snn_energy(2000, 9, 0.02, model) == doctest::Approx(2 * base).epsilon(1e-12));
    CHECK(snn_energy(1000, 18, 0.02, model) == doctest::Approx(2 * base).epsilon(1e-12));
    CHECK(snn_energy(1000, 9, 0.04, model) == doctest::Approx(2 * base).epsilon(1e-12));
    CHECK(snn_energy(0, 9, 0.02, model) == 0.0);
    CHECK(snn_energy(1000, 9, 0.0, model) == 0.0);
    CHECK(mac_energy(0.0, model) == 0.0);
    CHECK(mac_energy(2e9, model) == doctest::Approx(2.0 * mac_energy(1e9, model)).epsilon(1e-12));
    // A custom model scales through.
    const EnergyModel doubled{1.8e-12, 9.2e-12};
    CHECK(snn_energy(1000, 9, 0.02, doubled) == doctest::Approx(2 * base).epsilon(1e-12));
}

TEST_CASE("one interior event per step on a 10x10 layer gives f = 0.01") {
    // Each interior event stimulates 9 synapses; with m = 100, c = 9 the
    // per-step fraction is 9 / 900 = 0.01.
    const SensorGeometry g{10, 10};
    const TimeBase tb{0, 1000};
    EventStream stream;
    for (int k = 0; k < 50; ++k) stream.push_back({k * 1000, 5, 5, Polarity::kOn});
    const OpsReport r = measure_input_rate(stream, g, tb);
    CHECK(r.m_neurons == 100);
    CHECK(r.c_synapses == 9);
    CHECK(r.steps == 50);
    CHECK(r.f_rate == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(r.snn_energy_j ==
          doctest::Approx(snn_energy(100, 9, r.f_rate)).epsilon(1e-12));
}

TEST_CASE("border events stimulate fewer synapses") {
    const SensorGeometry g{10, 10};
    const TimeBase tb{0, 1000};
    // Corner event: only 4 neighbors on-sensor; edge event: 6.
    const EventStream corner{{0, 0, 0, Polarity::kOn}};
    CHECK(measure_input_rate(corner, g, tb).f_rate ==
          doctest::Approx(4.0 / 900.0).epsilon(1e-12));
    const EventStream edge{{0, 5, 0, Polarity::kOn}};
    CHECK(measure_input_rate(edge, g, tb).f_rate ==
          doctest::Approx(6.0 / 900.0).epsilon(1e-12));
}

TEST_CASE("measured rate equals an independent recount on random streams") {
    std::mt19937_64 rng(888);
    const SensorGeometry g{32, 24};
    const TimeBase tb{0, 1000};
    for (int iter = 0; iter < 30; ++iter) {
        EventStream stream;
        const int n = static_cast<int>(rng() % 400);
        for (int i = 0; i < n; ++i) {
            stream.push_back({static_cast<std::int64_t>(rng() % 50'000),
                              static_cast<std::int32_t>(rng() % g.width),
                              static_cast<std::int32_t>(rng() % g.height), Polarity::kOn});
        }
        std::sort(stream.begin(), stream.end(),
                  [](const Event& a, const Event& b) { return a.t_us < b.t_us; });
        const OpsReport r = measure_input_rate(stream, g, tb);
        if (stream.empty()) {
            CHECK(r.steps == 0);
            CHECK(r.f_rate == 0.0);
            continue;
        }
        std::int64_t stimulated = 0;
        std::int64_t max_t = 0;
        for (const Event& e : stream) {
            max_t = std::max(max_t, e.t_us);
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    if (e.x + dx >= 0 && e.x + dx < g.width && e.y + dy >= 0 &&
                        e.y + dy < g.height) {
                        ++stimulated;
                    }
                }
            }
        }
        const std::int64_t steps = max_t / 1000 + 1;
        CHECK(r.steps == steps);
        CHECK(r.f_rate == doctest::Approx(static_cast<double>(stimulated) /
                                          (768.0 * 9.0 * static_cast<double>(steps)))
                              .epsilon(1e-12));
    }
}

TEST_CASE("the measured rate is invariant under event reordering") {
    // f depends on multiset content only; time order affects nothing but the
    // step count, which is pinned by the max timestamp.
    const SensorGeometry g{16, 16};
    const TimeBase tb{0, 1000};
    EventStream a{{0, 3, 3, Polarity::kOn},
                  {5000, 8, 8, Polarity::kOff},
                  {9000, 15, 15, Polarity::kOn}};
    EventStream b{a[2], a[0], a[1]};  // measure_input_rate never re-sorts
    const OpsReport ra = measure_input_rate(a, g, tb);
    const OpsReport rb = measure_input_rate(b, g, tb);
    CHECK(ra.f_rate == rb.f_rate);
    CHECK(ra.steps == rb.steps);
    CHECK(ra.snn_energy_j == rb.snn_energy_j);
}

TEST_CASE("an empty stream reports zero rate over zero steps") {
    const OpsReport r = measure_input_rate(EventStream{}, SensorGeometry{16, 16}, TimeBase{0, 1000});
    CHECK(r.m_neurons == 256);
    CHECK(r.c_synapses == 9);
    CHECK(r.steps == 0);
    CHECK(r.f_rate == 0.0);
    CHECK(r.snn_energy_j == 0.0);
}
