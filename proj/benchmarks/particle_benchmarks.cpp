#include <benchmark/benchmark.h>

#include <cstddef>
#include <vector>

#include <qsdp/diffusion.hpp>
#include <qsdp/neutron.hpp>
#include <qsdp/oracle.hpp>
#include <qsdp/particle_engine.hpp>
#include <qsdp/rng.hpp>
#include <qsdp/substochastic_matrix.hpp>

namespace {

// Dense strictly positive chain with ~10% absorption everywhere; size is the
// only knob that matters for throughput.
qsdp::SubstochasticMatrix dense_chain(std::size_t states) {
    qsdp::Rng rng(12345, states);
    std::vector<std::vector<double>> rows(states, std::vector<double>(states));
    for (auto& row : rows) {
        double total = 0.0;
        for (auto& entry : row) {
            entry = 0.1 + rng.uniform();
            total += entry;
        }
        for (auto& entry : row) entry *= 0.9 / total;
    }
    return qsdp::SubstochasticMatrix::from_rows(rows);
}

void advance_one_step(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto matrix = dense_chain(16);
    qsdp::ParticleEnsemble<std::size_t> ensemble(std::vector<std::size_t>(n, 0));
    qsdp::Rng rng(999, 0);
    qsdp::StepWorkspace ws;
    for (auto _ : state) {
        const auto report = qsdp::advance_one_step(ensemble, matrix, rng, ws);
        benchmark::DoNotOptimize(report.rebirths);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

void qsd_power_iteration(benchmark::State& state) {
    const auto matrix = dense_chain(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        const auto result = qsdp::qsd_exact(matrix, 1e-12);
        benchmark::DoNotOptimize(result.lambda0);
    }
}

void neutron_single_step(benchmark::State& state) {
    const qsdp::NeutronModel model(qsdp::NeutronDomain::unit_disk(), 1.0);
    qsdp::Rng rng(777, 0);
    qsdp::NeutronState s(0.2, -0.1, 1.0, 0.0);
    for (auto _ : state) {
        const auto out = qsdp::neutron_step(model, s, rng);
        if (out.is_alive()) s = out.state();
        benchmark::DoNotOptimize(s.x);
    }
}

void diffusion_single_step(benchmark::State& state) {
    const qsdp::DiffusionSpec spec(3.0, static_cast<std::size_t>(state.range(0)));
    qsdp::Rng rng(555, 0);
    double x = 1.0;
    for (auto _ : state) {
        const auto out = qsdp::diffusion_step(spec, x, rng);
        x = out.is_alive() ? out.state() : 1.0;
        benchmark::DoNotOptimize(x);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

} // namespace

BENCHMARK(advance_one_step)->Arg(100)->Arg(1000)->Arg(10000);
BENCHMARK(qsd_power_iteration)->Arg(4)->Arg(16)->Arg(64);
BENCHMARK(neutron_single_step);
BENCHMARK(diffusion_single_step)->Arg(100)->Arg(400);

BENCHMARK_MAIN();
