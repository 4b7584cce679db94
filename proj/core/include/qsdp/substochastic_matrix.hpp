#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "qsdp/rng.hpp"
#include "qsdp/step_outcome.hpp"

namespace qsdp {

struct ValidationReport {
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
};

// Finite absorbed Markov kernel: square nonnegative matrix with row sums in
// (0, 1].  The missing row mass is the per-state absorption probability.
// Row sums in (1, 1 + 1e-12] are clamped to 1 at construction so that
// floating-point model assembly does not spuriously fail validation.
class SubstochasticMatrix {
public:
    using State = std::size_t;

    static constexpr double kRowSumTolerance = 1e-12;

    // Shape is enforced here; content violations are reported by validate()
    // so callers can inspect malformed input instead of losing it.
    static SubstochasticMatrix from_rows(const std::vector<std::vector<double>>& rows);

    // Parses {"size": S, "rows": [[...], ...]}.  Throws ConfigError with the
    // offending field in the message.
    static SubstochasticMatrix from_json_text(const std::string& text);
    static SubstochasticMatrix load_json_file(const std::string& path);

    std::size_t size() const { return size_; }

    double entry(std::size_t i, std::size_t j) const {
        return entries_[i * size_ + j];
    }

    double row_sum(std::size_t i) const { return row_sums_[i]; }

    double absorption_probability(std::size_t i) const {
        const double p = 1.0 - row_sums_[i];
        return p > 0.0 ? p : 0.0;
    }

    // Nonnegative entries, row sums in (0, 1 + tolerance].
    ValidationReport validate() const;

    // One transition from `from` by inverse CDF over the row; the trailing
    // [row_sum, 1) interval absorbs.  Consumes exactly one uniform.
    // Precondition: validate().ok().
    template <RandomSource R>
    StepOutcome<State> sample_step(State from, R& rng) const {
        const double u = rng.uniform();
        const double* row = &entries_[from * size_];
        double cum = 0.0;
        for (std::size_t j = 0; j < size_; ++j) {
            cum += row[j];
            if (u < cum) return StepOutcome<State>::alive(j);
        }
        return StepOutcome<State>::absorbed();
    }

private:
    SubstochasticMatrix(std::size_t size, std::vector<double> entries);

    std::size_t size_ = 0;
    std::vector<double> entries_;   // row-major
    std::vector<double> row_sums_;
};

} // namespace qsdp
