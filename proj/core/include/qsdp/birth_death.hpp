#pragma once

#include <vector>

#include "qsdp/substochastic_matrix.hpp"

namespace qsdp {

// Nearest-neighbour chain on {0, ..., S-1} with a per-site killing
// probability.  Boundary moves that would leave the lattice are disallowed
// at construction rather than reflected, so the matrix is exactly what the
// rates say.
struct BirthDeathSpec {
    std::vector<double> birth;   // up-moves;   birth[S-1] == 0
    std::vector<double> death;   // down-moves; death[0]   == 0
    std::vector<double> kill;    // absorption; kill[i] < 1

    std::size_t size() const { return birth.size(); }
};

// Tridiagonal assembly: stay-put probability absorbs the slack
// 1 - birth - death - kill.  Throws std::invalid_argument on any spec
// violation.
SubstochasticMatrix birth_death_matrix(const BirthDeathSpec& spec);

} // namespace qsdp
