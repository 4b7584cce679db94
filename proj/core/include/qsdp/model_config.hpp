#pragma once

#include <cstddef>
#include <string>
#include <variant>

#include "qsdp/diffusion.hpp"
#include "qsdp/neutron.hpp"
#include "qsdp/substochastic_matrix.hpp"

namespace qsdp {

struct FiniteModelConfig {
    SubstochasticMatrix matrix;
};

struct NeutronModelConfig {
    NeutronModel model;
    std::size_t grid_n;
    bool velocity_octants;
};

struct DiffusionModelConfig {
    DiffusionModel model;
    std::size_t bins;
};

using ModelConfig = std::variant<FiniteModelConfig, NeutronModelConfig, DiffusionModelConfig>;

// Strict-schema model document:
//   {"version": 1, "type": "birth_death", "birth": [...], "death": [...], "kill": [...]}
//   {"version": 1, "type": "neutron", "domain": {...}, "jump_rate": r,
//    "grid_n": g, "velocity_octants": b}
//   {"version": 1, "type": "diffusion", "beta": b, "substeps": m, "bins": c}
// Unknown keys are rejected at every level; all violations raise ConfigError
// naming the offending field.
ModelConfig parse_model_config(const std::string& json_text);
ModelConfig load_model_config(const std::string& path);

} // namespace qsdp
