#pragma once

#include <string>
#include <vector>

#include "h1fact/grid.hpp"

namespace h1fact {

// family of axis-aligned cell-index rectangles used by the oscillation scan
struct RectFamily {
    enum class Mode { AllAligned, Dyadic, Sampled };
    Mode mode = Mode::AllAligned;
    index_t count = 0;       // Sampled: number of draws
    std::uint64_t seed = 0;  // Sampled: RNG seed
};

// sup over the family of the mean absolute deviation from the rectangle mean
double bmo_norm(const GridFunction& b, const RectFamily& family);

// sup over rows and columns of the 1D analogue
double bmo_slicewise(const GridFunction& b);

struct BmoRow {
    std::string id;
    bool constant = false;
    double bmo = 0.0;
    double slicewise = 0.0;
    double ratio = 0.0; // bmo / slicewise, NaN for constants
};

struct BmoComparisonReport {
    std::vector<BmoRow> rows;
    double min_ratio = 0.0; // over nonconstant symbols
    double max_ratio = 0.0;
};

BmoComparisonReport
bmo_equivalence_report(const std::vector<std::pair<std::string, GridFunction>>& symbols,
                       const RectFamily& family);

} // namespace h1fact
