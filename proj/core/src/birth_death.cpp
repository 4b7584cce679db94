#include "qsdp/birth_death.hpp"

#include <stdexcept>
#include <string>

namespace qsdp {

SubstochasticMatrix birth_death_matrix(const BirthDeathSpec& spec) {
    const std::size_t s = spec.size();
    if (s == 0)
        throw std::invalid_argument("birth-death: empty spec");
    if (spec.death.size() != s || spec.kill.size() != s)
        throw std::invalid_argument("birth-death: rate vectors differ in length");
    if (spec.death[0] != 0.0)
        throw std::invalid_argument("birth-death: death[0] must be 0 (no site below 0)");
    if (spec.birth[s - 1] != 0.0)
        throw std::invalid_argument("birth-death: birth at the top site must be 0");

    constexpr double kSlackTolerance = 1e-12;
    std::vector<std::vector<double>> rows(s, std::vector<double>(s, 0.0));
    for (std::size_t i = 0; i < s; ++i) {
        const double b = spec.birth[i];
        const double d = spec.death[i];
        const double k = spec.kill[i];
        if (!(b >= 0.0) || !(d >= 0.0) || !(k >= 0.0))
            throw std::invalid_argument("birth-death: negative rate at site " + std::to_string(i));
        if (!(k < 1.0))
            throw std::invalid_argument("birth-death: kill[" + std::to_string(i) +
                                        "] leaves no survival mass");
        const double total = b + d + k;
        if (total > 1.0 + kSlackTolerance)
            throw std::invalid_argument("birth-death: rates at site " + std::to_string(i) +
                                        " sum to " + std::to_string(total) + " > 1");
        if (i + 1 < s) rows[i][i + 1] = b;
        if (i > 0) rows[i][i - 1] = d;
        rows[i][i] = total < 1.0 ? 1.0 - total : 0.0;
    }
    return SubstochasticMatrix::from_rows(rows);
}

} // namespace qsdp
