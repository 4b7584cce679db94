#pragma once

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace qsdp {

enum class ExperimentKind { Simulate, Oracle, Qsd, Convergence, Uniform };

const char* to_string(ExperimentKind kind);

// Everything a run needs, assembled by the CLI (or by tests directly).
// Stochastic kinds refuse to run without an explicit seed; there is no
// wall-clock fallback anywhere.
struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::Simulate;
    std::string model_path;

    std::vector<long> particle_counts;    // one entry except for convergence
    std::optional<long> steps;            // conditioning time n
    std::optional<long> horizon;          // trajectory length
    std::optional<long> replicas;
    std::optional<std::uint64_t> seed;
    int workers = 1;
    std::string out_path;

    double burn_in_fraction = 0.5;
    long iteration_cap = -1;              // engine default when negative
    std::size_t init_state = 0;           // finite models: initial Dirac site
    std::optional<std::size_t> grid_n;    // override for continuous binning
    double tol = 1e-12;                   // power iteration
    long max_iterations = 1000000;
};

// Executes the configured experiment: writes the CSV artifact and its JSON
// summary next to it (<out>.summary.json, with a trailing .csv stripped),
// and prints a one-line summary (the oracle kind prints its JSON result).
// Throws ConfigError for bad configuration and ModelError for runtime model
// failures; the CLI maps those to exit codes 2 and 3.
void run(const ExperimentConfig& config, std::ostream& out = std::cout);

std::string summary_path_for(const std::string& out_path);

} // namespace qsdp
