#include "qkdnet/decoy.hpp"
#include "qkdnet/optics.hpp"
#include "qkdnet/protocol.hpp"
#include "qkdnet/scenario.hpp"
#include "qkdnet/topology.hpp"

#include <benchmark/benchmark.h>

#include <sstream>

namespace {

using namespace qkdnet;

void BM_ColorCompleteGraph(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    for (auto _ : state) {
        auto plan = color_complete_graph(n);
        benchmark::DoNotOptimize(plan);
    }
}
BENCHMARK(BM_ColorCompleteGraph)->Arg(8)->Arg(16)->Arg(64);

void BM_ValidatePlan(benchmark::State& state) {
    const auto plan = color_complete_graph(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        auto report = validate_plan(plan);
        benchmark::DoNotOptimize(report);
    }
}
BENCHMARK(BM_ValidatePlan)->Arg(16)->Arg(64);

void BM_SessionPulses(benchmark::State& state) {
    LinkPhysics p;
    p.mean_photon_number = 0.1;
    p.transmittance = transmittance(11.63);
    p.detector_efficiency = 0.10;
    p.visibility = 0.9744;
    p.dark_prob = 5.2e-6;
    p.excess_error = 0.0218;

    SessionConfig cfg;
    cfg.session_id = "bench";
    cfg.physics = p;
    cfg.pulse_count = static_cast<std::uint64_t>(state.range(0));

    for (auto _ : state) {
        RngStream rng = derive_stream(1, cfg.session_id);
        auto s = run_session(cfg, rng);
        benchmark::DoNotOptimize(s);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SessionPulses)->Arg(100000)->Arg(1000000);

void BM_DecoyBounds(benchmark::State& state) {
    DecoyChannel ch;
    ch.transmittance = transmittance(11.63);
    ch.detector_efficiency = 0.10;
    ch.dark_prob = 5.2e-6;
    ch.visibility_error = visibility_error(0.9744);
    ch.excess_error = 0.0218;
    const IntensityPair ip{0.6, 0.2};
    const auto obs = observables_from_channel(ch, ip);
    for (auto _ : state) {
        auto b = bound_y1_e1(obs, ip);
        benchmark::DoNotOptimize(b);
    }
}
BENCHMARK(BM_DecoyBounds);

void BM_ParseScenario(benchmark::State& state) {
    Scenario base;
    base.name = "bench";
    base.nodes = {{0, "A"}, {1, "B"}};
    base.node_names = {"A", "B"};
    base.fibers[0] = FiberLink{10.0, 0.2, {}};
    base.fibers[1] = FiberLink{12.0, 0.2, {}};
    base.grid = WavelengthGrid({1530.0});
    base.insertion_db_by_nm[1530.0] = 2.0;
    base.channel_nm[NodePair(0, 1)] = 1530.0;
    base.link_physics[NodePair(0, 1)] = {0.99, 1e-6, {}, 0.01, {}};
    base.sessions = {{0, 1}};
    const std::string text = serialize_scenario(base);
    for (auto _ : state) {
        auto s = parse_scenario(text, "bench");
        benchmark::DoNotOptimize(s);
    }
}
BENCHMARK(BM_ParseScenario);

} // namespace

int main(int argc, char** argv) {
    benchmark::Initialize(&argc, argv);
    if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
    benchmark::RunSpecifiedBenchmarks();
    return 0;
}
