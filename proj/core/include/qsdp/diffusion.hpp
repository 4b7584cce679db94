#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>

#include "qsdp/rng.hpp"
#include "qsdp/step_outcome.hpp"

namespace qsdp {

// Unit drift-singular diffusion on (0, 2]: dX = dW + dt / (beta X^(beta-1)),
// absorbed at 0, reflected at 2.  One step is one unit of time discretized
// into `substeps` Euler-Maruyama increments; the scheme itself is the model,
// there is no exactness claim beyond the substep limit.
struct DiffusionSpec {
    double beta;             // > 2, keeps the drift singularity integrable
    std::size_t substeps;    // increments per unit time

    DiffusionSpec(double beta, std::size_t substeps) : beta(beta), substeps(substeps) {
        if (!(beta > 2.0))
            throw std::invalid_argument("diffusion: beta must exceed 2");
        if (substeps == 0)
            throw std::invalid_argument("diffusion: need at least one substep");
    }
};

// Reflection at the upper boundary: fold x <- 4 - x while above 2.  A fold
// that lands at or below 0 absorbs, as does any direct excursion there.
// Absorption is checked after each substep, never inside one.
template <RandomSource R>
StepOutcome<double> diffusion_step(const DiffusionSpec& spec, double x, R& rng) {
    const double h = 1.0 / static_cast<double>(spec.substeps);
    const double sqrt_h = std::sqrt(h);
    for (std::size_t k = 0; k < spec.substeps; ++k) {
        x += h / (spec.beta * std::pow(x, spec.beta - 1.0)) + sqrt_h * rng.normal();
        while (x > 2.0) x = 4.0 - x;
        if (x <= 0.0) return StepOutcome<double>::absorbed();
    }
    return StepOutcome<double>::alive(x);
}

struct DiffusionModel {
    using State = double;

    DiffusionSpec spec;

    template <RandomSource R>
    StepOutcome<double> sample_step(double x, R& rng) const {
        return diffusion_step(spec, x, rng);
    }
};

// Uniform cells over (0, 2] for empirical laws of the diffusion.
struct IntervalBinning {
    std::size_t cells;

    explicit IntervalBinning(std::size_t cells) : cells(cells) {
        if (cells < 2)
            throw std::invalid_argument("interval binning: need at least 2 cells");
    }

    std::size_t bin_count() const { return cells; }

    std::size_t bin_index(double x) const {
        const double u = x / 2.0 * static_cast<double>(cells);
        if (!(u > 0.0)) return 0;
        auto c = static_cast<std::size_t>(u);
        return c < cells ? c : cells - 1;
    }
};

} // namespace qsdp
