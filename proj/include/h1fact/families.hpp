#pragma once

#include <string>
#include <vector>

#include "h1fact/atoms.hpp"

namespace h1fact {

// named test symbols on the unit square, n x n cells; "v1" is frozen so
// recorded baselines stay comparable across runs
std::vector<std::pair<std::string, GridFunction>> symbol_family(const std::string& version,
                                                                index_t n);

// "haar", "haar_y" or "random"
Atom atom_from_family(const std::string& kind, const Rect& rect, index_t n_subcells,
                      std::uint64_t seed);

} // namespace h1fact
