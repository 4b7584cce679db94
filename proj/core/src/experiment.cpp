#include "qsdp/experiment.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <stdexcept>
#include <variant>

#include <json.hpp>

#include "qsdp/analysis.hpp"
#include "qsdp/csv.hpp"
#include "qsdp/errors.hpp"
#include "qsdp/model_config.hpp"
#include "qsdp/oracle.hpp"
#include "qsdp/particle_engine.hpp"
#include "qsdp/rng.hpp"

namespace qsdp {

namespace {

using nlohmann::json;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

long require_opt(const std::optional<long>& v, const char* flag) {
    if (!v) throw ConfigError(std::string("missing required option ") + flag);
    return *v;
}

std::uint64_t require_seed(const ExperimentConfig& config) {
    if (!config.seed)
        throw ConfigError("missing required option --seed (runs are never clock-seeded)");
    return *config.seed;
}

long single_particle_count(const ExperimentConfig& config) {
    if (config.particle_counts.size() != 1)
        throw ConfigError("this experiment takes exactly one --N value");
    const long n = config.particle_counts.front();
    if (n < 2) throw ConfigError("--N must be at least 2");
    return n;
}

void require_out(const ExperimentConfig& config) {
    if (config.out_path.empty())
        throw ConfigError("missing required option --out");
}

void check_common(const ExperimentConfig& config) {
    if (config.model_path.empty())
        throw ConfigError("missing required option --model");
    if (config.workers < 1)
        throw ConfigError("--workers must be at least 1");
    if (!(config.burn_in_fraction >= 0.0 && config.burn_in_fraction < 1.0))
        throw ConfigError("--burn-in must lie in [0, 1)");
    if (!(config.tol > 0.0))
        throw ConfigError("--tol must be positive");
    if (config.max_iterations < 1)
        throw ConfigError("--max-iter must be positive");
}

void write_json_file(const std::string& path, const json& doc) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open " + path + " for writing");
    out << doc.dump(2) << '\n';
}

json interval_json(const Interval& iv) {
    return json{{"lo", iv.lo}, {"hi", iv.hi}};
}

Distribution finite_initial_law(const SubstochasticMatrix& matrix, std::size_t init_state) {
    if (init_state >= matrix.size())
        throw ConfigError("--init-state " + std::to_string(init_state) +
                          " is outside the state space");
    return Distribution::dirac(matrix.size(), init_state);
}

void check_finite_model_valid(const SubstochasticMatrix& matrix) {
    const auto report = matrix.validate();
    if (!report.ok())
        throw ConfigError("model config: " + report.violations.front());
}

// Continuous models bin through their descriptor; an explicit --grid-n
// overrides the configured resolution.
NeutronGridBinning neutron_binning_for(const ExperimentConfig& config,
                                       const NeutronModelConfig& model) {
    const std::size_t n = config.grid_n.value_or(model.grid_n);
    try {
        return neutron_binning(model.model.domain, n, model.velocity_octants);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("--grid-n: ") + e.what());
    }
}

IntervalBinning diffusion_binning_for(const ExperimentConfig& config,
                                      const DiffusionModelConfig& model) {
    try {
        return IntervalBinning{config.grid_n.value_or(model.bins)};
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("--grid-n: ") + e.what());
    }
}

template <typename State, typename MakeState>
ParticleEnsemble<State> iid_ensemble(long n, MakeState&& make) {
    std::vector<State> positions;
    positions.reserve(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) positions.push_back(make());
    return ParticleEnsemble<State>(std::move(positions));
}

// ---- simulate ----

std::vector<std::string> finite_header(std::size_t states) {
    std::vector<std::string> header{"step", "rebirths", "loop_iters"};
    for (std::size_t i = 0; i < states; ++i) header.push_back("bin_" + std::to_string(i));
    return header;
}

template <typename K, typename B>
long simulate_trajectory(const ExperimentConfig& config, const K& kernel, const B& binning,
                         ParticleEnsemble<typename K::State> initial, long horizon,
                         Rng& rng, bool wide_rows) {
    long total_rebirths = 0;
    std::unique_ptr<CsvWriter> csv;
    if (wide_rows)
        csv = std::make_unique<CsvWriter>(config.out_path, finite_header(binning.bin_count()));
    else
        csv = std::make_unique<CsvWriter>(
            config.out_path,
            std::vector<std::string>{"step", "rebirths", "loop_iters", "cell", "mass"});
    auto observe = [&](const ParticleEnsemble<typename K::State>& ensemble,
                       const StepReport& report) {
        total_rebirths += report.rebirths;
        const auto law = empirical_distribution(ensemble, binning);
        const std::string step = std::to_string(ensemble.step_index());
        const std::string rebirths = std::to_string(report.rebirths);
        const std::string iters = std::to_string(report.loop_iterations);
        if (wide_rows) {
            std::vector<std::string> cells{step, rebirths, iters};
            for (std::size_t i = 0; i < law.size(); ++i)
                cells.push_back(format_double(law[i]));
            csv->row(cells);
        } else {
            // Long form, occupied cells only, ascending cell index.
            for (std::size_t i = 0; i < law.size(); ++i)
                if (law[i] > 0.0)
                    csv->row({step, rebirths, iters, std::to_string(i),
                              format_double(law[i])});
        }
    };
    run_trajectory(kernel, std::move(initial), horizon, rng, observe, config.iteration_cap);
    return total_rebirths;
}

void run_simulate(const ExperimentConfig& config, const ModelConfig& model,
                  std::ostream& out) {
    const long n = single_particle_count(config);
    const long horizon = require_opt(config.horizon, "--horizon");
    if (horizon < 1) throw ConfigError("--horizon must be at least 1");
    if (config.replicas && *config.replicas != 1)
        throw ConfigError("simulate runs a single trajectory; drop --replicas");
    require_out(config);
    Rng rng = derive_rng_stream(require_seed(config), 0);

    long rebirths = 0;
    std::visit(
        overloaded{
            [&](const FiniteModelConfig& m) {
                check_finite_model_valid(m.matrix);
                const auto initial = finite_initial_law(m.matrix, config.init_state);
                auto ensemble = iid_ensemble<std::size_t>(
                    n, [&] { return initial.sample(rng); });
                rebirths = simulate_trajectory(config, m.matrix,
                                               IdentityBinning{m.matrix.size()},
                                               std::move(ensemble), horizon, rng, true);
            },
            [&](const NeutronModelConfig& m) {
                auto binning = neutron_binning_for(config, m);
                auto ensemble = iid_ensemble<NeutronState>(
                    n, [&] { return neutron_uniform_state(m.model.domain, rng); });
                rebirths = simulate_trajectory(config, m.model, binning,
                                               std::move(ensemble), horizon, rng, false);
            },
            [&](const DiffusionModelConfig& m) {
                auto binning = diffusion_binning_for(config, m);
                auto ensemble = iid_ensemble<double>(n, [] { return 1.0; });
                rebirths = simulate_trajectory(config, m.model, binning,
                                               std::move(ensemble), horizon, rng, false);
            },
        },
        model);
    out << "simulate: steps=" << horizon << " rebirths=" << rebirths
        << " out=" << config.out_path << '\n';
}

// ---- oracle ----

void run_oracle(const ExperimentConfig& config, const ModelConfig& model,
                std::ostream& out) {
    const auto* finite = std::get_if<FiniteModelConfig>(&model);
    if (!finite)
        throw ConfigError("oracle requires a finite model");
    check_finite_model_valid(finite->matrix);
    const long steps = require_opt(config.steps, "--n");
    if (steps < 0) throw ConfigError("--n must be nonnegative");
    const auto initial = finite_initial_law(finite->matrix, config.init_state);

    const auto conditioned = conditional_distribution_exact(finite->matrix, initial, steps);
    const double survival = survival_probability_exact(finite->matrix, initial, steps);
    const auto qsd = qsd_exact(finite->matrix, config.tol, config.max_iterations);
    const auto mixing = estimate_mixing_rate(finite->matrix, 32);

    json doc{
        {"conditional", {{"n", steps}, {"weights", conditioned.weights()}}},
        {"survival_probability", survival},
        {"qsd",
         {{"weights", qsd.qsd.weights()},
          {"lambda0", qsd.lambda0},
          {"iterations", qsd.iterations},
          {"residual", qsd.residual}}},
        {"mixing",
         {{"gamma", std::isfinite(mixing.gamma) ? json(mixing.gamma) : json()},
          {"underflowed", mixing.underflowed},
          {"no_decay", mixing.no_decay}}},
    };
    out << doc.dump(2) << '\n';
    if (!config.out_path.empty()) write_json_file(config.out_path, doc);
}

// ---- qsd ----

void run_qsd(const ExperimentConfig& config, const ModelConfig& model, std::ostream& out) {
    const long n = single_particle_count(config);
    const long horizon = require_opt(config.horizon, "--horizon");
    if (horizon < 1) throw ConfigError("--horizon must be at least 1");
    require_out(config);
    Rng rng = derive_rng_stream(require_seed(config), 0);

    json summary{{"experiment", "qsd"},
                 {"model", config.model_path},
                 {"particles", n},
                 {"horizon", horizon},
                 {"burn_in_fraction", config.burn_in_fraction},
                 {"seed", *config.seed}};
    std::string key_stat;

    std::visit(
        overloaded{
            [&](const FiniteModelConfig& m) {
                check_finite_model_valid(m.matrix);
                const auto initial = finite_initial_law(m.matrix, config.init_state);
                auto ensemble = iid_ensemble<std::size_t>(
                    n, [&] { return initial.sample(rng); });
                const auto estimate =
                    qsd_estimate(m.matrix, IdentityBinning{m.matrix.size()},
                                 std::move(ensemble), horizon, config.burn_in_fraction,
                                 rng, config.iteration_cap);
                CsvWriter csv(config.out_path, {"bin", "mass"});
                for (std::size_t i = 0; i < estimate.size(); ++i)
                    csv.row({std::to_string(i), format_double(estimate[i])});
                const auto exact = qsd_exact(m.matrix, config.tol, config.max_iterations);
                const double tv = tv_distance(estimate, exact.qsd);
                summary["tv_to_exact"] = tv;
                summary["lambda0_exact"] = exact.lambda0;
                key_stat = " tv_to_exact=" + format_double(tv);
            },
            [&](const NeutronModelConfig& m) {
                auto binning = neutron_binning_for(config, m);
                auto ensemble = iid_ensemble<NeutronState>(
                    n, [&] { return neutron_uniform_state(m.model.domain, rng); });
                const auto estimate =
                    qsd_estimate(m.model, binning, std::move(ensemble), horizon,
                                 config.burn_in_fraction, rng, config.iteration_cap);
                CsvWriter csv(config.out_path, {"cell", "mass"});
                for (std::size_t i = 0; i < estimate.size(); ++i)
                    if (estimate[i] > 0.0)
                        csv.row({std::to_string(i), format_double(estimate[i])});
            },
            [&](const DiffusionModelConfig& m) {
                auto binning = diffusion_binning_for(config, m);
                auto ensemble = iid_ensemble<double>(n, [] { return 1.0; });
                const auto estimate =
                    qsd_estimate(m.model, binning, std::move(ensemble), horizon,
                                 config.burn_in_fraction, rng, config.iteration_cap);
                CsvWriter csv(config.out_path, {"cell", "mass"});
                for (std::size_t i = 0; i < estimate.size(); ++i)
                    if (estimate[i] > 0.0)
                        csv.row({std::to_string(i), format_double(estimate[i])});
            },
        },
        model);
    write_json_file(summary_path_for(config.out_path), summary);
    out << "qsd: N=" << n << " horizon=" << horizon << key_stat
        << " out=" << config.out_path << '\n';
}

// ---- convergence ----

void run_convergence(const ExperimentConfig& config, const ModelConfig& model,
                     std::ostream& out) {
    const auto* finite = std::get_if<FiniteModelConfig>(&model);
    if (!finite)
        throw ConfigError("convergence requires a finite model");
    check_finite_model_valid(finite->matrix);
    if (config.particle_counts.empty())
        throw ConfigError("missing required option --N");
    const long steps = require_opt(config.steps, "--n");
    const long replicas = require_opt(config.replicas, "--replicas");
    require_out(config);

    const auto initial = finite_initial_law(finite->matrix, config.init_state);
    const auto battery = default_test_functions(finite->matrix.size());
    const auto curve = convergence_experiment(finite->matrix, initial, steps,
                                              config.particle_counts, replicas, battery,
                                              require_seed(config), config.workers);

    CsvWriter csv(config.out_path, {"N", "mean_abs_error", "std_error", "bound"});
    for (const auto& p : curve.points)
        csv.row({std::to_string(p.particles), format_double(p.mean_abs_error),
                 format_double(p.std_error), format_double(p.bound)});
    write_json_file(summary_path_for(config.out_path),
                    json{{"experiment", "convergence"},
                         {"model", config.model_path},
                         {"steps", steps},
                         {"replicas", replicas},
                         {"seed", *config.seed},
                         {"fitted_slope", curve.fitted_slope},
                         {"slope_ci", interval_json(curve.slope_ci)},
                         {"bound_exceeded", curve.bound_exceeded}});
    out << "convergence: slope=" << format_double(curve.fitted_slope)
        << " bound_exceeded=" << (curve.bound_exceeded ? "true" : "false")
        << " out=" << config.out_path << '\n';
}

// ---- uniform ----

void run_uniform(const ExperimentConfig& config, const ModelConfig& model,
                 std::ostream& out) {
    const auto* finite = std::get_if<FiniteModelConfig>(&model);
    if (!finite)
        throw ConfigError("uniform requires a finite model");
    check_finite_model_valid(finite->matrix);
    const long n = single_particle_count(config);
    const long horizon = require_opt(config.horizon, "--horizon");
    const long replicas = require_opt(config.replicas, "--replicas");
    require_out(config);

    const auto initial = finite_initial_law(finite->matrix, config.init_state);
    const auto battery = default_test_functions(finite->matrix.size());
    const auto sweep = uniform_in_time_experiment(finite->matrix, initial, n, horizon,
                                                  replicas, battery, require_seed(config),
                                                  config.workers);

    CsvWriter csv(config.out_path, {"step", "mean_abs_error"});
    for (std::size_t k = 0; k < sweep.per_step_error.size(); ++k)
        csv.row({std::to_string(k), format_double(sweep.per_step_error[k])});
    write_json_file(summary_path_for(config.out_path),
                    json{{"experiment", "uniform"},
                         {"model", config.model_path},
                         {"particles", n},
                         {"horizon", horizon},
                         {"replicas", replicas},
                         {"seed", *config.seed},
                         {"sup_error", sweep.sup_error},
                         {"drift_slope", sweep.drift_slope},
                         {"drift_slope_ci", interval_json(sweep.drift_slope_ci)}});
    out << "uniform: sup_error=" << format_double(sweep.sup_error)
        << " drift_slope=" << format_double(sweep.drift_slope)
        << " out=" << config.out_path << '\n';
}

} // namespace

const char* to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::Simulate: return "simulate";
        case ExperimentKind::Oracle: return "oracle";
        case ExperimentKind::Qsd: return "qsd";
        case ExperimentKind::Convergence: return "convergence";
        case ExperimentKind::Uniform: return "uniform";
    }
    return "?";
}

std::string summary_path_for(const std::string& out_path) {
    const std::string suffix = ".csv";
    if (out_path.size() > suffix.size() &&
        out_path.compare(out_path.size() - suffix.size(), suffix.size(), suffix) == 0)
        return out_path.substr(0, out_path.size() - suffix.size()) + ".summary.json";
    return out_path + ".summary.json";
}

void run(const ExperimentConfig& config, std::ostream& out) {
    check_common(config);
    if (config.iteration_cap >= 0) {
        for (long n : config.particle_counts)
            if (config.iteration_cap < n)
                throw ConfigError("--iteration-cap must be at least the ensemble size");
    }
    const ModelConfig model = load_model_config(config.model_path);
    switch (config.kind) {
        case ExperimentKind::Simulate: run_simulate(config, model, out); break;
        case ExperimentKind::Oracle: run_oracle(config, model, out); break;
        case ExperimentKind::Qsd: run_qsd(config, model, out); break;
        case ExperimentKind::Convergence: run_convergence(config, model, out); break;
        case ExperimentKind::Uniform: run_uniform(config, model, out); break;
    }
}

} // namespace qsdp
