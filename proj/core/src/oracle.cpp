#include "qsdp/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "qsdp/errors.hpp"

#include "ls_fit.hpp"

namespace qsdp {

namespace {

void require_valid(const SubstochasticMatrix& matrix) {
    const auto report = matrix.validate();
    if (!report.ok())
        throw std::invalid_argument("oracle: invalid kernel: " + report.violations.front());
}

// One conditioned step in place: w <- w P / ||w P||_1.  Returns the mass
// ratio ||w P||_1, which is the per-step survival probability.
double conditioned_step(const SubstochasticMatrix& matrix, std::vector<double>& w,
                        std::vector<double>& scratch) {
    const std::size_t s = matrix.size();
    std::fill(scratch.begin(), scratch.end(), 0.0);
    for (std::size_t i = 0; i < s; ++i) {
        const double wi = w[i];
        if (wi == 0.0) continue;
        for (std::size_t j = 0; j < s; ++j) scratch[j] += wi * matrix.entry(i, j);
    }
    double mass = 0.0;
    for (double v : scratch) mass += v;
    if (mass <= 0.0)
        throw ModelError("oracle: conditioning on null event (survival mass underflowed to 0)");
    for (std::size_t j = 0; j < s; ++j) w[j] = scratch[j] / mass;
    return mass;
}

double tv_gap(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
    return 0.5 * acc;
}

} // namespace

Distribution conditional_distribution_exact(const SubstochasticMatrix& matrix,
                                            const Distribution& initial, long steps) {
    require_valid(matrix);
    if (initial.size() != matrix.size())
        throw std::invalid_argument("oracle: initial law size mismatch");
    if (steps < 0)
        throw std::invalid_argument("oracle: negative step count");
    std::vector<double> w = initial.weights();
    std::vector<double> scratch(w.size());
    for (long k = 0; k < steps; ++k) conditioned_step(matrix, w, scratch);
    return Distribution::from_weights(std::move(w));
}

double survival_probability_exact(const SubstochasticMatrix& matrix,
                                  const Distribution& initial, long steps) {
    require_valid(matrix);
    if (initial.size() != matrix.size())
        throw std::invalid_argument("oracle: initial law size mismatch");
    if (steps < 0)
        throw std::invalid_argument("oracle: negative step count");
    std::vector<double> w = initial.weights();
    std::vector<double> scratch(w.size());
    double log_mass = 0.0;
    for (long k = 0; k < steps; ++k)
        log_mass += std::log(conditioned_step(matrix, w, scratch));
    return std::exp(log_mass);
}

QsdResult qsd_exact(const SubstochasticMatrix& matrix, double tol, long max_iterations) {
    require_valid(matrix);
    if (!(tol > 0.0))
        throw std::invalid_argument("oracle: tolerance must be positive");
    if (max_iterations < 1)
        throw std::invalid_argument("oracle: max_iterations must be positive");

    const std::size_t s = matrix.size();
    std::vector<double> w(s, 1.0 / static_cast<double>(s));
    std::vector<double> prev(s), scratch(s);
    double mass = 1.0;
    double residual = std::numeric_limits<double>::infinity();
    for (long it = 1; it <= max_iterations; ++it) {
        prev = w;
        mass = conditioned_step(matrix, w, scratch);
        residual = tv_gap(w, prev);
        if (residual < tol) {
            // Row-sum clamping leaves eigenvalues a few ulp above 1 for
            // stochastic input; pin those to exactly 1.
            const double eigenvalue = std::min(mass, 1.0);
            return QsdResult{Distribution::from_weights(std::move(w)),
                             -std::log(eigenvalue), it, residual};
        }
    }
    throw ConvergenceError("oracle: power iteration did not converge after " +
                               std::to_string(max_iterations) +
                               " iterations (residual " + std::to_string(residual) +
                               "); kernel may be periodic",
                           residual, max_iterations);
}

MixingReport estimate_mixing_rate(const SubstochasticMatrix& matrix, long horizon) {
    require_valid(matrix);
    if (horizon < 2)
        throw std::invalid_argument("oracle: horizon must be at least 2");

    // Numerical floor for TV between renormalized iterates; below this the
    // gap is rounding noise, not signal.
    constexpr double kFloor = 1e-13;
    constexpr double kNoDecayRate = 1e-2;

    const std::size_t s = matrix.size();
    MixingReport report;
    report.gamma = std::numeric_limits<double>::infinity();
    report.underflowed = false;
    report.no_decay = false;
    report.d.assign(static_cast<std::size_t>(horizon) + 1, 0.0);

    if (s < 2) return report;   // single Dirac, nothing to contrast

    std::vector<std::vector<double>> laws(s);
    std::vector<double> scratch(s);
    for (std::size_t x = 0; x < s; ++x) {
        laws[x].assign(s, 0.0);
        laws[x][x] = 1.0;
    }
    for (std::size_t x = 0; x < s; ++x)
        for (std::size_t y = x + 1; y < s; ++y)
            report.d[0] = std::max(report.d[0], tv_gap(laws[x], laws[y]));

    long usable = 0;   // largest n with d[n] above the floor
    for (long n = 1; n <= horizon; ++n) {
        for (std::size_t x = 0; x < s; ++x) conditioned_step(matrix, laws[x], scratch);
        double worst = 0.0;
        for (std::size_t x = 0; x < s; ++x)
            for (std::size_t y = x + 1; y < s; ++y)
                worst = std::max(worst, tv_gap(laws[x], laws[y]));
        report.d[static_cast<std::size_t>(n)] = worst;
        if (worst > kFloor)
            usable = n;
        else
            break;
    }
    if (usable == 0) return report;   // coupled immediately; treat as instant mixing
    report.underflowed = usable < horizon;

    // Fit over the tail half of the usable prefix.
    const long lo = std::max<long>(1, usable / 2);
    std::vector<double> xs, ys;
    for (long n = lo; n <= usable; ++n) {
        xs.push_back(static_cast<double>(n));
        ys.push_back(-std::log(report.d[static_cast<std::size_t>(n)]));
    }
    if (xs.size() < 2) {
        report.no_decay = true;
        report.gamma = 0.0;
        return report;
    }
    report.gamma = detail::ls_slope(xs, ys);
    report.no_decay = report.gamma < kNoDecayRate;
    return report;
}

} // namespace qsdp
