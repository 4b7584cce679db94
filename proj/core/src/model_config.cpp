#include "qsdp/model_config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "qsdp/birth_death.hpp"
#include "qsdp/errors.hpp"

namespace qsdp {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, const std::vector<std::string>& allowed,
                         const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        bool known = false;
        for (const auto& a : allowed)
            if (key == a) {
                known = true;
                break;
            }
        if (!known)
            throw ConfigError("model config: unknown key \"" + key + "\" in " + where);
    }
}

double require_number(const json& obj, const std::string& key) {
    if (!obj.contains(key))
        throw ConfigError("model config: missing \"" + key + "\"");
    if (!obj[key].is_number())
        throw ConfigError("model config: \"" + key + "\" must be a number");
    return obj[key].get<double>();
}

double number_or(const json& obj, const std::string& key, double fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number())
        throw ConfigError("model config: \"" + key + "\" must be a number");
    return obj[key].get<double>();
}

std::size_t count_or(const json& obj, const std::string& key, std::size_t fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number_unsigned())
        throw ConfigError("model config: \"" + key + "\" must be a nonnegative integer");
    return obj[key].get<std::size_t>();
}

std::vector<double> require_number_array(const json& obj, const std::string& key) {
    if (!obj.contains(key))
        throw ConfigError("model config: missing \"" + key + "\"");
    if (!obj[key].is_array())
        throw ConfigError("model config: \"" + key + "\" must be an array");
    std::vector<double> out;
    out.reserve(obj[key].size());
    for (std::size_t i = 0; i < obj[key].size(); ++i) {
        if (!obj[key][i].is_number())
            throw ConfigError("model config: \"" + key + "\"[" + std::to_string(i) +
                              "] is not a number");
        out.push_back(obj[key][i].get<double>());
    }
    return out;
}

ModelConfig parse_birth_death(const json& doc) {
    reject_unknown_keys(doc, {"version", "type", "birth", "death", "kill"}, "birth_death model");
    BirthDeathSpec spec{require_number_array(doc, "birth"),
                        require_number_array(doc, "death"),
                        require_number_array(doc, "kill")};
    try {
        return FiniteModelConfig{birth_death_matrix(spec)};
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("model config: ") + e.what());
    }
}

NeutronDomain parse_domain(const json& doc) {
    if (!doc.contains("domain")) return NeutronDomain::unit_disk();
    const json& dom = doc["domain"];
    if (!dom.is_object() || !dom.contains("shape") || !dom["shape"].is_string())
        throw ConfigError("model config: \"domain\" must be an object with a \"shape\"");
    const std::string shape = dom["shape"].get<std::string>();
    if (shape == "disk") {
        reject_unknown_keys(dom, {"shape", "radius"}, "disk domain");
        return NeutronDomain(Disk{number_or(dom, "radius", 1.0)});
    }
    if (shape == "polygon") {
        reject_unknown_keys(dom, {"shape", "vertices"}, "polygon domain");
        if (!dom.contains("vertices") || !dom["vertices"].is_array())
            throw ConfigError("model config: polygon domain needs a \"vertices\" array");
        ConvexPolygon poly;
        for (std::size_t i = 0; i < dom["vertices"].size(); ++i) {
            const auto& v = dom["vertices"][i];
            if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
                throw ConfigError("model config: vertices[" + std::to_string(i) +
                                  "] must be [x, y]");
            poly.vertices.push_back({v[0].get<double>(), v[1].get<double>()});
        }
        return NeutronDomain(std::move(poly));
    }
    throw ConfigError("model config: unknown domain shape \"" + shape + "\"");
}

ModelConfig parse_neutron(const json& doc) {
    reject_unknown_keys(doc, {"version", "type", "domain", "jump_rate", "grid_n",
                              "velocity_octants"},
                        "neutron model");
    bool octants = false;
    if (doc.contains("velocity_octants")) {
        if (!doc["velocity_octants"].is_boolean())
            throw ConfigError("model config: \"velocity_octants\" must be a boolean");
        octants = doc["velocity_octants"].get<bool>();
    }
    try {
        NeutronModel model(parse_domain(doc), number_or(doc, "jump_rate", 1.0));
        const std::size_t grid_n = count_or(doc, "grid_n", 20);
        neutron_binning(model.domain, grid_n, octants);   // validates grid_n now
        return NeutronModelConfig{std::move(model), grid_n, octants};
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("model config: ") + e.what());
    }
}

ModelConfig parse_diffusion(const json& doc) {
    reject_unknown_keys(doc, {"version", "type", "beta", "substeps", "bins"},
                        "diffusion model");
    try {
        DiffusionSpec spec(require_number(doc, "beta"), count_or(doc, "substeps", 100));
        const std::size_t bins = count_or(doc, "bins", 40);
        IntervalBinning{bins};   // validates now
        return DiffusionModelConfig{DiffusionModel{spec}, bins};
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("model config: ") + e.what());
    }
}

} // namespace

ModelConfig parse_model_config(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("model config: ") + e.what());
    }
    if (!doc.is_object())
        throw ConfigError("model config: top level must be an object");
    if (!doc.contains("version") || !doc["version"].is_number_integer() ||
        doc["version"].get<long>() != 1)
        throw ConfigError("model config: \"version\" must be 1");
    if (!doc.contains("type") || !doc["type"].is_string())
        throw ConfigError("model config: missing \"type\"");
    const std::string type = doc["type"].get<std::string>();
    if (type == "birth_death") return parse_birth_death(doc);
    if (type == "neutron") return parse_neutron(doc);
    if (type == "diffusion") return parse_diffusion(doc);
    throw ConfigError("model config: unknown type \"" + type + "\"");
}

ModelConfig load_model_config(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("model config: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_model_config(buf.str());
}

} // namespace qsdp
