#pragma once

#include <optional>
#include <utility>

namespace qsdp {

// Result of one kernel transition: either a live successor state or
// absorption.  Absorbed outcomes carry no state on purpose; the cemetery is
// not part of the state space.
template <typename State>
class StepOutcome {
public:
    static StepOutcome alive(State s) { return StepOutcome(std::move(s)); }
    static StepOutcome absorbed() { return StepOutcome(); }

    bool is_alive() const { return next_.has_value(); }

    // Precondition: is_alive().
    const State& state() const { return *next_; }

private:
    StepOutcome() = default;
    explicit StepOutcome(State s) : next_(std::move(s)) {}

    std::optional<State> next_;
};

} // namespace qsdp
