#pragma once

#include <json.hpp>

#include "h1fact/factorization.hpp"

namespace h1fact {

using json = nlohmann::ordered_json;

json grid_function_to_json(const GridFunction& f);
GridFunction grid_function_from_json(const json& j);

json rect_to_json(const Rect& r);
Rect rect_from_json(const json& j);

json decomposition_to_json(const AtomicDecomposition& d);
AtomicDecomposition decomposition_from_json(const json& j);

json factorization_to_json(const Factorization& f);
Factorization factorization_from_json(const json& j);

} // namespace h1fact
