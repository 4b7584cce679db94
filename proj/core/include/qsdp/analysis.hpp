#pragma once

#include <cstdint>
#include <vector>

#include "qsdp/distribution.hpp"
#include "qsdp/oracle.hpp"
#include "qsdp/particle_engine.hpp"
#include "qsdp/substochastic_matrix.hpp"

namespace qsdp {

struct Interval {
    double lo, hi;
    bool contains(double v) const { return lo <= v && v <= hi; }
};

struct ErrorCurvePoint {
    long particles;
    double mean_abs_error;   // over replicas, averaged across test functions
    double std_error;        // of that mean
    double bound;            // a-priori rate bound for this ensemble size
};

struct ErrorCurve {
    std::vector<ErrorCurvePoint> points;
    double fitted_slope;     // log mean error vs log N; NaN if an error is 0
    Interval slope_ci;       // bootstrap percentile interval
    bool bound_exceeded;     // some empirical mean crossed the a-priori bound
};

struct UniformSweep {
    std::vector<double> per_step_error;   // index 0 is the freshly drawn ensemble
    double sup_error;
    double drift_slope;                   // error vs step over the tail half
    Interval drift_slope_ci;
};

// Indicator of each state plus the constant 1.  The constant has zero error
// by construction (empirical laws are exactly normalized) and anchors the
// battery.
std::vector<std::vector<double>> default_test_functions(std::size_t states);

// Worst-case bias exponent of the time-n ensemble when the horizon grows
// with the particle count: error O(N^alpha) uniformly in n.  Strictly
// inside (-1/2, 0) for positive rates.
double alpha_bound(double gamma, double lambda0);

// Mean absolute error of the time-n ensemble against the exact conditioned
// law, across `replicas` independent runs per ensemble size.  Each replica
// draws its particles i.i.d. from `initial` and consumes its own RNG stream
// (index k * replicas + r over the size list), so results do not depend on
// the worker count.  Stream index count * replicas drives the bootstrap.
ErrorCurve convergence_experiment(const SubstochasticMatrix& matrix,
                                  const Distribution& initial, long steps,
                                  const std::vector<long>& particle_counts, long replicas,
                                  const std::vector<std::vector<double>>& test_functions,
                                  std::uint64_t seed, int workers = 1,
                                  long bootstrap_resamples = 200);

// Per-step mean absolute error over a long horizon at fixed N.  Requires a
// model whose conditioned laws actually merge (checked via the mixing-rate
// probe); without that the uniform-in-time picture does not apply.
UniformSweep uniform_in_time_experiment(const SubstochasticMatrix& matrix,
                                        const Distribution& initial, long particles,
                                        long horizon, long replicas,
                                        const std::vector<std::vector<double>>& test_functions,
                                        std::uint64_t seed, int workers = 1,
                                        long bootstrap_resamples = 200);

// Time average of the empirical law after burn-in along one trajectory.
// The ergodic theorem for the particle system is what makes this a QSD
// estimator; burn_in_fraction in [0, 1) controls how much prefix to drop.
template <typename K, typename B, RandomSource R>
    requires AbsorbedKernel<K, R> && BinningFor<B, typename K::State>
Distribution qsd_estimate(const K& kernel, const B& binning,
                          ParticleEnsemble<typename K::State> initial, long horizon,
                          double burn_in_fraction, R& rng, long iteration_cap = -1) {
    if (horizon < 1)
        throw std::invalid_argument("qsd estimate: horizon must be positive");
    if (!(burn_in_fraction >= 0.0 && burn_in_fraction < 1.0))
        throw std::invalid_argument("qsd estimate: burn-in fraction must lie in [0, 1)");
    const long burn_in = static_cast<long>(burn_in_fraction * static_cast<double>(horizon));
    std::vector<double> acc(binning.bin_count(), 0.0);
    long used = 0;
    auto observe = [&](const ParticleEnsemble<typename K::State>& ensemble,
                       const StepReport&) {
        if (ensemble.step_index() <= burn_in) return;
        const auto law = empirical_distribution(ensemble, binning);
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += law[i];
        ++used;
    };
    run_trajectory(kernel, std::move(initial), horizon, rng, observe, iteration_cap);
    if (used == 0)
        throw std::invalid_argument("qsd estimate: burn-in swallowed the whole horizon");
    for (auto& w : acc) w /= static_cast<double>(used);
    return Distribution::from_weights(std::move(acc));
}

} // namespace qsdp
