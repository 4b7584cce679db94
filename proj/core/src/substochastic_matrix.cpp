#include "qsdp/substochastic_matrix.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "qsdp/errors.hpp"

namespace qsdp {

SubstochasticMatrix::SubstochasticMatrix(std::size_t size, std::vector<double> entries)
    : size_(size), entries_(std::move(entries)), row_sums_(size, 0.0) {
    for (std::size_t i = 0; i < size_; ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < size_; ++j) sum += entries_[i * size_ + j];
        if (sum > 1.0 && sum <= 1.0 + kRowSumTolerance) {
            for (std::size_t j = 0; j < size_; ++j) entries_[i * size_ + j] /= sum;
            sum = 1.0;
        }
        row_sums_[i] = sum;
    }
}

SubstochasticMatrix SubstochasticMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
    const std::size_t s = rows.size();
    if (s == 0)
        throw std::invalid_argument("substochastic matrix: no rows");
    std::vector<double> flat;
    flat.reserve(s * s);
    for (std::size_t i = 0; i < s; ++i) {
        if (rows[i].size() != s)
            throw std::invalid_argument("substochastic matrix: row " + std::to_string(i) +
                                        " has " + std::to_string(rows[i].size()) +
                                        " entries, expected " + std::to_string(s));
        flat.insert(flat.end(), rows[i].begin(), rows[i].end());
    }
    return SubstochasticMatrix(s, std::move(flat));
}

ValidationReport SubstochasticMatrix::validate() const {
    ValidationReport report;
    for (std::size_t i = 0; i < size_; ++i) {
        for (std::size_t j = 0; j < size_; ++j) {
            const double p = entry(i, j);
            if (!(p >= 0.0))
                report.violations.push_back("entry (" + std::to_string(i) + "," +
                                            std::to_string(j) + ") is negative or NaN");
        }
        if (!(row_sums_[i] > 0.0))
            report.violations.push_back("row " + std::to_string(i) +
                                        " has zero survival mass");
        else if (row_sums_[i] > 1.0 + kRowSumTolerance)
            report.violations.push_back("row " + std::to_string(i) + " sums to " +
                                        std::to_string(row_sums_[i]) + " > 1");
    }
    return report;
}

namespace {

// Field-precise schema errors; nlohmann reports byte offsets for raw parse
// failures, which we forward as-is.
SubstochasticMatrix parse_kernel_json(const nlohmann::json& doc) {
    if (!doc.is_object())
        throw ConfigError("kernel json: top level must be an object");
    if (!doc.contains("size"))
        throw ConfigError("kernel json: missing \"size\"");
    if (!doc["size"].is_number_unsigned() || doc["size"].get<std::size_t>() == 0)
        throw ConfigError("kernel json: \"size\" must be a positive integer");
    if (!doc.contains("rows") || !doc["rows"].is_array())
        throw ConfigError("kernel json: missing \"rows\" array");
    for (const auto& [key, value] : doc.items()) {
        (void)value;
        if (key != "size" && key != "rows")
            throw ConfigError("kernel json: unknown key \"" + key + "\"");
    }
    const std::size_t s = doc["size"].get<std::size_t>();
    if (doc["rows"].size() != s)
        throw ConfigError("kernel json: expected " + std::to_string(s) + " rows, got " +
                          std::to_string(doc["rows"].size()));
    std::vector<std::vector<double>> rows(s);
    for (std::size_t i = 0; i < s; ++i) {
        const auto& row = doc["rows"][i];
        if (!row.is_array() || row.size() != s)
            throw ConfigError("kernel json: rows[" + std::to_string(i) + "] must be an array of " +
                              std::to_string(s) + " numbers");
        rows[i].resize(s);
        for (std::size_t j = 0; j < s; ++j) {
            if (!row[j].is_number())
                throw ConfigError("kernel json: rows[" + std::to_string(i) + "][" +
                                  std::to_string(j) + "] is not a number");
            rows[i][j] = row[j].get<double>();
        }
    }
    auto matrix = SubstochasticMatrix::from_rows(rows);
    const auto report = matrix.validate();
    if (!report.ok())
        throw ConfigError("kernel json: " + report.violations.front());
    return matrix;
}

} // namespace

SubstochasticMatrix SubstochasticMatrix::from_json_text(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("kernel json: ") + e.what());
    }
    return parse_kernel_json(doc);
}

SubstochasticMatrix SubstochasticMatrix::load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("kernel json: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json_text(buf.str());
}

} // namespace qsdp
