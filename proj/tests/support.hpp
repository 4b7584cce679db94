#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "qsdp/rng.hpp"
#include "qsdp/substochastic_matrix.hpp"

namespace qsdp_test {

// The 2-state chain used as the shared reference throughout the suite.
// Its conditioned dynamics are fully solvable: survival eigenvalue 0.8,
// QSD (4/7, 3/7), second eigenvalue 0.1, so the conditional law from the
// Dirac at 0 is (4/7 + (3/7) 0.125^n, 3/7 - (3/7) 0.125^n) and the
// worst-case Dirac gap is exactly 0.125^n.
inline qsdp::SubstochasticMatrix running_example() {
    return qsdp::SubstochasticMatrix::from_rows({{0.5, 0.3}, {0.4, 0.4}});
}

// Strictly positive rows (hence primitive), per-state absorption drawn
// uniformly from [0, max_absorption).
inline qsdp::SubstochasticMatrix random_chain(qsdp::Rng& rng, std::size_t states,
                                              double max_absorption) {
    std::vector<std::vector<double>> rows(states, std::vector<double>(states));
    for (auto& row : rows) {
        double total = 0.0;
        for (auto& entry : row) {
            entry = 0.05 + rng.uniform();
            total += entry;
        }
        const double survival = 1.0 - max_absorption * rng.uniform();
        for (auto& entry : row) entry *= survival / total;
    }
    return qsdp::SubstochasticMatrix::from_rows(rows);
}

// Replays pre-recorded draws, one queue per method, and records every
// uniform_below bound.  Lets kernel and engine tests pin an exact decision
// path instead of fishing for seeds.
class ScriptedRng {
public:
    std::vector<double> uniforms;
    std::vector<std::uint64_t> picks;         // uniform_below results in call order
    std::vector<double> waits;                // exponential results; rate is ignored
    std::vector<double> normals;

    std::vector<std::uint64_t> seen_bounds;   // bound of each uniform_below call

    double uniform() { return take(uniforms, next_uniform_); }

    std::uint64_t uniform_below(std::uint64_t n) {
        seen_bounds.push_back(n);
        const auto v = take(picks, next_pick_);
        if (v >= n) throw std::logic_error("scripted pick out of range");
        return v;
    }

    double exponential(double) { return take(waits, next_wait_); }

    double normal() { return take(normals, next_normal_); }

private:
    template <typename T>
    static T take(const std::vector<T>& queue, std::size_t& at) {
        if (at >= queue.size()) throw std::logic_error("rng script exhausted");
        return queue[at++];
    }

    std::size_t next_uniform_ = 0, next_pick_ = 0, next_wait_ = 0, next_normal_ = 0;
};

static_assert(qsdp::RandomSource<ScriptedRng>);

} // namespace qsdp_test
