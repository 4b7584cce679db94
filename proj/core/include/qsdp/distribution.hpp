#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "qsdp/rng.hpp"

namespace qsdp {

// Probability vector over a finite state space or over the cells of a
// binning.  Weights are nonnegative and sum to 1 within 1e-9.
class Distribution {
public:
    static constexpr double kMassTolerance = 1e-9;

    static Distribution from_weights(std::vector<double> w) {
        if (w.empty())
            throw std::invalid_argument("distribution: empty weight vector");
        double mass = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) {
            if (!(w[i] >= 0.0))
                throw std::invalid_argument(
                    "distribution: negative weight at index " + std::to_string(i));
            mass += w[i];
        }
        if (std::abs(mass - 1.0) > kMassTolerance)
            throw std::invalid_argument(
                "distribution: weights sum to " + std::to_string(mass));
        return Distribution(std::move(w));
    }

    static Distribution dirac(std::size_t size, std::size_t at) {
        if (at >= size)
            throw std::invalid_argument("distribution: dirac index out of range");
        std::vector<double> w(size, 0.0);
        w[at] = 1.0;
        return Distribution(std::move(w));
    }

    static Distribution uniform(std::size_t size) {
        if (size == 0)
            throw std::invalid_argument("distribution: empty state space");
        return Distribution(std::vector<double>(size, 1.0 / static_cast<double>(size)));
    }

    std::size_t size() const { return weights_.size(); }
    double operator[](std::size_t i) const { return weights_[i]; }
    const std::vector<double>& weights() const { return weights_; }

    // Expectation of a bounded test function given as per-state values.
    double expect(const std::vector<double>& f) const {
        if (f.size() != weights_.size())
            throw std::invalid_argument("distribution: test function size mismatch");
        return std::inner_product(weights_.begin(), weights_.end(), f.begin(), 0.0);
    }

    // Inverse-CDF draw; consumes one uniform.
    template <RandomSource R>
    std::size_t sample(R& rng) const {
        const double u = rng.uniform();
        double cum = 0.0;
        for (std::size_t i = 0; i + 1 < weights_.size(); ++i) {
            cum += weights_[i];
            if (u < cum) return i;
        }
        return weights_.size() - 1;
    }

private:
    explicit Distribution(std::vector<double> w) : weights_(std::move(w)) {}

    std::vector<double> weights_;
};

// Half the L1 distance; 0 for equal distributions, 1 for disjoint supports.
inline double tv_distance(const Distribution& a, const Distribution& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("tv_distance: size mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
    return 0.5 * acc;
}

} // namespace qsdp
