#include "qsdp/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "qsdp/errors.hpp"
#include "qsdp/replica_pool.hpp"
#include "qsdp/rng.hpp"

#include "ls_fit.hpp"

namespace qsdp {

namespace {

constexpr double kRateBoundConstant = 2.0 * (1.0 + 1.4142135623730951);

void check_test_functions(std::size_t states,
                          const std::vector<std::vector<double>>& fs) {
    if (fs.empty())
        throw std::invalid_argument("experiment: empty test function battery");
    for (const auto& f : fs) {
        if (f.size() != states)
            throw std::invalid_argument("experiment: test function size mismatch");
        for (double v : f)
            if (!(std::abs(v) <= 1.0))
                throw std::invalid_argument("experiment: test functions must be bounded by 1");
    }
}

std::vector<std::size_t> sample_iid_positions(const Distribution& law, long n, Rng& rng) {
    std::vector<std::size_t> positions(static_cast<std::size_t>(n));
    for (auto& p : positions) p = law.sample(rng);
    return positions;
}

double mean_of(const std::vector<double>& v) {
    double acc = 0.0;
    for (double x : v) acc += x;
    return acc / static_cast<double>(v.size());
}

double std_error_of(const std::vector<double>& v, double mean) {
    if (v.size() < 2) return 0.0;
    double acc = 0.0;
    for (double x : v) acc += (x - mean) * (x - mean);
    return std::sqrt(acc / static_cast<double>(v.size() - 1) /
                     static_cast<double>(v.size()));
}

std::size_t rng_index(Rng& rng, long n) {
    return static_cast<std::size_t>(rng.uniform_below(static_cast<std::uint64_t>(n)));
}

Interval percentile_interval(std::vector<double> stats) {
    std::sort(stats.begin(), stats.end());
    const auto last = stats.size() - 1;
    const auto lo = static_cast<std::size_t>(std::floor(0.025 * static_cast<double>(last)));
    const auto hi = static_cast<std::size_t>(std::ceil(0.975 * static_cast<double>(last)));
    return Interval{stats[lo], stats[hi]};
}

} // namespace

std::vector<std::vector<double>> default_test_functions(std::size_t states) {
    std::vector<std::vector<double>> fs;
    fs.reserve(states + 1);
    for (std::size_t i = 0; i < states; ++i) {
        std::vector<double> f(states, 0.0);
        f[i] = 1.0;
        fs.push_back(std::move(f));
    }
    fs.emplace_back(states, 1.0);
    return fs;
}

double alpha_bound(double gamma, double lambda0) {
    if (!(gamma > 0.0) || !std::isfinite(gamma))
        throw std::invalid_argument("alpha bound: gamma must be positive and finite");
    if (!(lambda0 > 0.0) || !std::isfinite(lambda0))
        throw std::invalid_argument("alpha bound: lambda0 must be positive and finite");
    return -gamma / (2.0 * (lambda0 + gamma));
}

ErrorCurve convergence_experiment(const SubstochasticMatrix& matrix,
                                  const Distribution& initial, long steps,
                                  const std::vector<long>& particle_counts, long replicas,
                                  const std::vector<std::vector<double>>& test_functions,
                                  std::uint64_t seed, int workers,
                                  long bootstrap_resamples) {
    const std::size_t s = matrix.size();
    if (initial.size() != s)
        throw std::invalid_argument("experiment: initial law size mismatch");
    if (particle_counts.empty())
        throw std::invalid_argument("experiment: empty particle count list");
    for (long n : particle_counts)
        if (n < 2)
            throw std::invalid_argument("experiment: ensemble sizes must be at least 2");
    if (replicas < 1)
        throw std::invalid_argument("experiment: need at least one replica");
    if (steps < 0)
        throw std::invalid_argument("experiment: negative step count");
    check_test_functions(s, test_functions);

    const auto conditioned = conditional_distribution_exact(matrix, initial, steps);
    std::vector<double> oracle_values(test_functions.size());
    for (std::size_t k = 0; k < test_functions.size(); ++k)
        oracle_values[k] = conditioned.expect(test_functions[k]);
    const double survival = survival_probability_exact(matrix, initial, steps);
    double f_sup = 0.0;
    for (const auto& f : test_functions)
        for (double v : f) f_sup = std::max(f_sup, std::abs(v));

    const IdentityBinning binning{s};
    ErrorCurve curve;
    curve.bound_exceeded = false;
    // errors[k][r]: replica r at particle_counts[k], averaged over the battery
    std::vector<std::vector<double>> errors;
    errors.reserve(particle_counts.size());

    for (std::size_t k = 0; k < particle_counts.size(); ++k) {
        const long n_particles = particle_counts[k];
        auto replica_error = [&, n_particles, k](long r) {
            Rng rng = derive_rng_stream(
                seed, static_cast<std::uint64_t>(k) * static_cast<std::uint64_t>(replicas) +
                          static_cast<std::uint64_t>(r));
            ParticleEnsemble<std::size_t> ensemble(
                sample_iid_positions(initial, n_particles, rng));
            const auto record = run_trajectory(matrix, std::move(ensemble), steps, rng);
            const auto law = empirical_distribution(record.final_ensemble, binning);
            double acc = 0.0;
            for (std::size_t f = 0; f < test_functions.size(); ++f)
                acc += std::abs(law.expect(test_functions[f]) - oracle_values[f]);
            return acc / static_cast<double>(test_functions.size());
        };
        errors.push_back(run_indexed<double>(replicas, workers, replica_error));

        const double mean = mean_of(errors.back());
        ErrorCurvePoint point;
        point.particles = n_particles;
        point.mean_abs_error = mean;
        point.std_error = std_error_of(errors.back(), mean);
        point.bound = kRateBoundConstant * f_sup /
                      (std::sqrt(static_cast<double>(n_particles)) * survival);
        if (mean > point.bound) curve.bound_exceeded = true;
        curve.points.push_back(point);
    }

    // Log-log slope; a zero mean error (exactly matched battery) has no
    // log, so the fit degrades to NaN rather than inventing a rate.
    std::vector<double> log_n, log_err;
    bool fit_ok = true;
    for (const auto& p : curve.points) {
        if (!(p.mean_abs_error > 0.0)) fit_ok = false;
        log_n.push_back(std::log(static_cast<double>(p.particles)));
        log_err.push_back(p.mean_abs_error > 0.0 ? std::log(p.mean_abs_error) : 0.0);
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (!fit_ok || curve.points.size() < 2) {
        curve.fitted_slope = nan;
        curve.slope_ci = Interval{nan, nan};
        return curve;
    }
    curve.fitted_slope = detail::ls_slope(log_n, log_err);

    Rng boot_rng = derive_rng_stream(
        seed, static_cast<std::uint64_t>(particle_counts.size()) *
                  static_cast<std::uint64_t>(replicas));
    std::vector<double> slopes;
    slopes.reserve(static_cast<std::size_t>(bootstrap_resamples));
    std::vector<double> resampled_log_err(curve.points.size());
    for (long b = 0; b < bootstrap_resamples; ++b) {
        bool usable = true;
        for (std::size_t k = 0; k < curve.points.size(); ++k) {
            double acc = 0.0;
            for (long r = 0; r < replicas; ++r)
                acc += errors[k][rng_index(boot_rng, replicas)];
            const double mean = acc / static_cast<double>(replicas);
            if (!(mean > 0.0)) {
                usable = false;
                break;
            }
            resampled_log_err[k] = std::log(mean);
        }
        if (usable) slopes.push_back(detail::ls_slope(log_n, resampled_log_err));
    }
    curve.slope_ci = slopes.size() >= 2 ? percentile_interval(std::move(slopes))
                                        : Interval{nan, nan};
    return curve;
}

UniformSweep uniform_in_time_experiment(const SubstochasticMatrix& matrix,
                                        const Distribution& initial, long particles,
                                        long horizon, long replicas,
                                        const std::vector<std::vector<double>>& test_functions,
                                        std::uint64_t seed, int workers,
                                        long bootstrap_resamples) {
    const std::size_t s = matrix.size();
    if (initial.size() != s)
        throw std::invalid_argument("experiment: initial law size mismatch");
    if (particles < 2)
        throw std::invalid_argument("experiment: ensemble size must be at least 2");
    if (horizon < 2)
        throw std::invalid_argument("experiment: horizon must be at least 2");
    if (replicas < 1)
        throw std::invalid_argument("experiment: need at least one replica");
    check_test_functions(s, test_functions);

    const auto mixing = estimate_mixing_rate(matrix, std::min<long>(horizon, 64));
    if (mixing.no_decay)
        throw ModelError(
            "uniform-in-time experiment: conditioned laws do not merge for this model");

    // Conditioned law and battery expectations at every step up to horizon.
    std::vector<std::vector<double>> oracle_values(
        static_cast<std::size_t>(horizon) + 1,
        std::vector<double>(test_functions.size()));
    {
        Distribution law = initial;
        for (long n = 0; n <= horizon; ++n) {
            for (std::size_t f = 0; f < test_functions.size(); ++f)
                oracle_values[static_cast<std::size_t>(n)][f] = law.expect(test_functions[f]);
            if (n < horizon) law = conditional_distribution_exact(matrix, law, 1);
        }
    }

    const IdentityBinning binning{s};
    auto replica_errors = [&](long r) {
        Rng rng = derive_rng_stream(seed, static_cast<std::uint64_t>(r));
        std::vector<double> err(static_cast<std::size_t>(horizon) + 1);
        ParticleEnsemble<std::size_t> ensemble(
            sample_iid_positions(initial, particles, rng));
        auto record_error = [&](const ParticleEnsemble<std::size_t>& e, long n) {
            const auto law = empirical_distribution(e, binning);
            double acc = 0.0;
            for (std::size_t f = 0; f < test_functions.size(); ++f)
                acc += std::abs(law.expect(test_functions[f]) -
                                oracle_values[static_cast<std::size_t>(n)][f]);
            err[static_cast<std::size_t>(n)] = acc / static_cast<double>(test_functions.size());
        };
        record_error(ensemble, 0);
        auto observe = [&](const ParticleEnsemble<std::size_t>& e, const StepReport&) {
            record_error(e, e.step_index());
        };
        run_trajectory(matrix, std::move(ensemble), horizon, rng, observe);
        return err;
    };
    const auto errors = run_indexed<std::vector<double>>(replicas, workers, replica_errors);

    UniformSweep sweep;
    sweep.per_step_error.assign(static_cast<std::size_t>(horizon) + 1, 0.0);
    for (const auto& err : errors)
        for (std::size_t n = 0; n < err.size(); ++n) sweep.per_step_error[n] += err[n];
    for (auto& e : sweep.per_step_error) e /= static_cast<double>(replicas);
    sweep.sup_error = *std::max_element(sweep.per_step_error.begin(),
                                        sweep.per_step_error.end());

    const long tail_lo = horizon / 2;
    std::vector<double> xs;
    for (long n = tail_lo; n <= horizon; ++n) xs.push_back(static_cast<double>(n));
    std::vector<double> ys(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i)
        ys[i] = sweep.per_step_error[static_cast<std::size_t>(tail_lo) + i];
    sweep.drift_slope = detail::ls_slope(xs, ys);

    Rng boot_rng = derive_rng_stream(seed, static_cast<std::uint64_t>(replicas));
    std::vector<double> slopes;
    slopes.reserve(static_cast<std::size_t>(bootstrap_resamples));
    for (long b = 0; b < bootstrap_resamples; ++b) {
        std::fill(ys.begin(), ys.end(), 0.0);
        for (long r = 0; r < replicas; ++r) {
            const auto& err = errors[rng_index(boot_rng, replicas)];
            for (std::size_t i = 0; i < ys.size(); ++i)
                ys[i] += err[static_cast<std::size_t>(tail_lo) + i];
        }
        for (auto& y : ys) y /= static_cast<double>(replicas);
        slopes.push_back(detail::ls_slope(xs, ys));
    }
    sweep.drift_slope_ci = percentile_interval(std::move(slopes));
    return sweep;
}

} // namespace qsdp
