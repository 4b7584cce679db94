#pragma once

#include <concepts>
#include <cstddef>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "qsdp/distribution.hpp"
#include "qsdp/errors.hpp"
#include "qsdp/rng.hpp"
#include "qsdp/step_outcome.hpp"

namespace qsdp {

template <typename K, typename R>
concept AbsorbedKernel =
    RandomSource<R> && requires(const K k, const typename K::State& s, R& r) {
        { k.sample_step(s, r) } -> std::same_as<StepOutcome<typename K::State>>;
    };

template <typename B, typename State>
concept BinningFor = requires(const B b, const State& s) {
    { b.bin_count() } -> std::convertible_to<std::size_t>;
    { b.bin_index(s) } -> std::convertible_to<std::size_t>;
};

inline std::string state_label(std::size_t s) { return std::to_string(s); }

inline std::string state_label(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", x);
    return buf;
}

struct StepReport {
    long rebirths = 0;          // absorption events redrawn during the step
    long loop_iterations = 0;   // particle updates spent finishing the step
};

// N interacting copies of the chain; no particle is ever absorbed at a step
// boundary.  Slots are never reordered, so particle identity is the slot
// index throughout a trajectory.
template <typename State>
class ParticleEnsemble {
public:
    explicit ParticleEnsemble(std::vector<State> positions)
        : positions_(std::move(positions)) {
        if (positions_.size() < 2)
            throw std::invalid_argument("particle ensemble: need at least 2 particles");
    }

    std::size_t size() const { return positions_.size(); }
    const std::vector<State>& positions() const { return positions_; }
    std::vector<State>& positions() { return positions_; }

    long step_index() const { return step_index_; }
    long total_rebirths() const { return total_rebirths_; }
    const std::vector<long>& per_step_rebirths() const { return per_step_rebirths_; }

    void record_step(const StepReport& report) {
        ++step_index_;
        total_rebirths_ += report.rebirths;
        per_step_rebirths_.push_back(report.rebirths);
    }

private:
    std::vector<State> positions_;
    long step_index_ = 0;
    long total_rebirths_ = 0;
    std::vector<long> per_step_rebirths_;
};

// Scratch for one ensemble step, reusable across steps to avoid churn.
struct StepWorkspace {
    std::vector<char> finished;          // per-slot flag: holds a next-step position
    std::vector<std::size_t> pending;    // slots still flagged 0, dense for O(1) draws
};

inline long default_iteration_cap(std::size_t n_particles) {
    return 1000 * static_cast<long>(n_particles);
}

// One synchronized step of the ensemble.  Each loop iteration picks a
// uniformly random unfinished slot, draws one kernel transition from it, and
// either commits the live successor (flag -> 1) or, on absorption, copies
// position AND flag from a uniformly random other slot.  Copying the flag is
// what keeps the step exact: a donor that already finished hands over its
// next-step position, a donor still pending hands over its current-step
// position and the slot stays in the loop.
//
// Randomness per iteration, in order: one uniform_below for the slot choice,
// the kernel's own draws, then one uniform_below for the donor choice if the
// transition absorbed.
//
// The loop terminates a.s. whenever every state has positive survival
// probability; the iteration cap converts a violation of that assumption
// into a diagnosable error instead of a hang.
template <typename State, typename K, RandomSource R>
    requires AbsorbedKernel<K, R>
StepReport advance_one_step(ParticleEnsemble<State>& ensemble, const K& kernel, R& rng,
                            StepWorkspace& ws,
                            long iteration_cap = -1) {
    const std::size_t n = ensemble.size();
    if (iteration_cap < 0) iteration_cap = default_iteration_cap(n);
    if (iteration_cap < static_cast<long>(n))
        throw std::invalid_argument("particle step: iteration cap below ensemble size");

    auto& x = ensemble.positions();
    ws.finished.assign(n, 0);
    ws.pending.resize(n);
    for (std::size_t i = 0; i < n; ++i) ws.pending[i] = i;

    StepReport report;
    while (!ws.pending.empty()) {
        if (report.loop_iterations >= iteration_cap) {
            std::string msg =
                "particle step stalled after " + std::to_string(iteration_cap) +
                " iterations (suspected survivability violation); pending states:";
            const std::size_t shown = std::min<std::size_t>(ws.pending.size(), 8);
            for (std::size_t k = 0; k < shown; ++k)
                msg += " " + state_label(x[ws.pending[k]]);
            if (ws.pending.size() > shown) msg += " ...";
            throw ModelError(msg);
        }
        ++report.loop_iterations;

        const std::size_t slot_draw = rng.uniform_below(ws.pending.size());
        const std::size_t i0 = ws.pending[slot_draw];
        const auto outcome = kernel.sample_step(x[i0], rng);
        bool done;
        if (outcome.is_alive()) {
            x[i0] = outcome.state();
            done = true;
        } else {
            ++report.rebirths;
            const std::size_t r = rng.uniform_below(n - 1);
            const std::size_t j0 = r + (r >= i0 ? 1 : 0);
            x[i0] = x[j0];
            done = ws.finished[j0] != 0;
        }
        if (done) {
            ws.finished[i0] = 1;
            ws.pending[slot_draw] = ws.pending.back();
            ws.pending.pop_back();
        }
    }
    ensemble.record_step(report);
    return report;
}

template <typename State, typename K, RandomSource R>
    requires AbsorbedKernel<K, R>
StepReport advance_one_step(ParticleEnsemble<State>& ensemble, const K& kernel, R& rng,
                            long iteration_cap = -1) {
    StepWorkspace ws;
    return advance_one_step(ensemble, kernel, rng, ws, iteration_cap);
}

template <typename State>
struct TrajectoryRecord {
    ParticleEnsemble<State> final_ensemble;
    std::vector<StepReport> steps;
};

struct NullObserver {
    template <typename E>
    void operator()(const E&, const StepReport&) const {}
};

// Runs `horizon` steps from the given ensemble.  The observer sees the
// ensemble after every step, which is how experiments collect per-step
// empirical laws without the engine knowing about binning.
template <typename State, typename K, RandomSource R, typename Observer = NullObserver>
    requires AbsorbedKernel<K, R>
TrajectoryRecord<State> run_trajectory(const K& kernel, ParticleEnsemble<State> initial,
                                       long horizon, R& rng,
                                       Observer&& observe = NullObserver{},
                                       long iteration_cap = -1) {
    if (horizon < 0)
        throw std::invalid_argument("trajectory: negative horizon");
    TrajectoryRecord<State> record{std::move(initial), {}};
    record.steps.reserve(static_cast<std::size_t>(horizon));
    StepWorkspace ws;
    for (long step = 0; step < horizon; ++step) {
        const auto report =
            advance_one_step(record.final_ensemble, kernel, rng, ws, iteration_cap);
        record.steps.push_back(report);
        observe(std::as_const(record.final_ensemble), report);
    }
    return record;
}

// Fraction of particles per bin; exact counts over N, so always a valid
// distribution.
template <typename State, typename B>
    requires BinningFor<B, State>
Distribution empirical_distribution(const ParticleEnsemble<State>& ensemble,
                                    const B& binning) {
    std::vector<double> w(binning.bin_count(), 0.0);
    for (const auto& s : ensemble.positions()) {
        const std::size_t cell = binning.bin_index(s);
        if (cell >= w.size())
            throw std::invalid_argument("empirical distribution: bin index out of range");
        w[cell] += 1.0;
    }
    for (auto& v : w) v /= static_cast<double>(ensemble.size());
    return Distribution::from_weights(std::move(w));
}

// Finite chains bin by state identity.
struct IdentityBinning {
    std::size_t states;
    std::size_t bin_count() const { return states; }
    std::size_t bin_index(std::size_t s) const { return s; }
};

} // namespace qsdp
