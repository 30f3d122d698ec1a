#include "h1fact/norms.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace h1fact {

namespace {

// mean absolute deviation from the mean over a cell-index box, inclusive;
// values are anchored at the corner cell so constant boxes come out exactly
// zero regardless of representability
double oscillation(const GridFunction& b, index_t x0, index_t x1, index_t y0, index_t y1) {
    const index_t nx = b.grid().dims[0];
    const auto& v = b.values();
    const double ref = v[static_cast<std::size_t>(y0 * nx + x0)];
    const double count = static_cast<double>((x1 - x0 + 1) * (y1 - y0 + 1));
    double sum = 0.0;
    for (index_t iy = y0; iy <= y1; ++iy)
        for (index_t ix = x0; ix <= x1; ++ix)
            sum += v[static_cast<std::size_t>(iy * nx + ix)] - ref;
    const double mean = sum / count;
    double dev = 0.0;
    for (index_t iy = y0; iy <= y1; ++iy)
        for (index_t ix = x0; ix <= x1; ++ix)
            dev += std::abs(v[static_cast<std::size_t>(iy * nx + ix)] - ref - mean);
    return dev / count;
}

double scan_all_aligned(const GridFunction& b) {
    const index_t nx = b.grid().dims[0], ny = b.grid().dims[1];
    if (nx > 48 || ny > 48)
        throw BudgetExceeded("all-aligned scan is limited to 48 cells per axis");
    double best = 0.0;
    for (index_t y0 = 0; y0 < ny; ++y0)
        for (index_t y1 = y0; y1 < ny; ++y1)
            for (index_t x0 = 0; x0 < nx; ++x0)
                for (index_t x1 = x0; x1 < nx; ++x1)
                    best = std::max(best, oscillation(b, x0, x1, y0, y1));
    return best;
}

double scan_dyadic(const GridFunction& b) {
    const index_t nx = b.grid().dims[0], ny = b.grid().dims[1];
    double best = 0.0;
    for (index_t wy = 1; wy <= ny; wy *= 2)
        for (index_t wx = 1; wx <= nx; wx *= 2)
            for (index_t y0 = 0; y0 + wy <= ny; y0 += wy)
                for (index_t x0 = 0; x0 + wx <= nx; x0 += wx)
                    best = std::max(best, oscillation(b, x0, x0 + wx - 1, y0, y0 + wy - 1));
    return best;
}

double scan_sampled(const GridFunction& b, index_t count, std::uint64_t seed) {
    if (count < 1) throw PreconditionViolated("sampled scan needs a positive draw count");
    const index_t nx = b.grid().dims[0], ny = b.grid().dims[1];
    std::mt19937_64 rng(seed);
    double best = 0.0;
    for (index_t s = 0; s < count; ++s) {
        index_t x0 = static_cast<index_t>(rng() % static_cast<std::uint64_t>(nx));
        index_t x1 = static_cast<index_t>(rng() % static_cast<std::uint64_t>(nx));
        index_t y0 = static_cast<index_t>(rng() % static_cast<std::uint64_t>(ny));
        index_t y1 = static_cast<index_t>(rng() % static_cast<std::uint64_t>(ny));
        if (x1 < x0) std::swap(x0, x1);
        if (y1 < y0) std::swap(y0, y1);
        best = std::max(best, oscillation(b, x0, x1, y0, y1));
    }
    return best;
}

double bmo_1d(const double* v, index_t n, index_t stride) {
    double best = 0.0;
    for (index_t i0 = 0; i0 < n; ++i0) {
        const double ref = v[static_cast<std::size_t>(i0 * stride)];
        double sum = 0.0;
        for (index_t i1 = i0; i1 < n; ++i1) {
            sum += v[static_cast<std::size_t>(i1 * stride)] - ref;
            const double mean = sum / static_cast<double>(i1 - i0 + 1);
            double dev = 0.0;
            for (index_t i = i0; i <= i1; ++i)
                dev += std::abs(v[static_cast<std::size_t>(i * stride)] - ref - mean);
            best = std::max(best, dev / static_cast<double>(i1 - i0 + 1));
        }
    }
    return best;
}

} // namespace

double bmo_norm(const GridFunction& b, const RectFamily& family) {
    switch (family.mode) {
    case RectFamily::Mode::AllAligned: return scan_all_aligned(b);
    case RectFamily::Mode::Dyadic: return scan_dyadic(b);
    case RectFamily::Mode::Sampled: return scan_sampled(b, family.count, family.seed);
    }
    throw PreconditionViolated("unknown rectangle family");
}

// sup over rows plus sup over columns; this always dominates the rectangle
// scan, since a rectangle's deviation splits into a within-row part and a
// deviation of the row means
double bmo_slicewise(const GridFunction& b) {
    const index_t nx = b.grid().dims[0], ny = b.grid().dims[1];
    const auto& v = b.values();
    double rows = 0.0, cols = 0.0;
    for (index_t iy = 0; iy < ny; ++iy)
        rows = std::max(rows, bmo_1d(v.data() + static_cast<std::size_t>(iy * nx), nx, 1));
    for (index_t ix = 0; ix < nx; ++ix)
        cols = std::max(cols, bmo_1d(v.data() + static_cast<std::size_t>(ix), ny, nx));
    return rows + cols;
}

BmoComparisonReport
bmo_equivalence_report(const std::vector<std::pair<std::string, GridFunction>>& symbols,
                       const RectFamily& family) {
    BmoComparisonReport rep;
    bool any = false;
    for (const auto& [id, b] : symbols) {
        BmoRow row;
        row.id = id;
        double lo = b.values()[0], hi = b.values()[0];
        for (double x : b.values()) {
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
        row.constant = lo == hi;
        if (row.constant) {
            row.ratio = std::numeric_limits<double>::quiet_NaN();
            rep.rows.push_back(std::move(row));
            continue;
        }
        row.bmo = bmo_norm(b, family);
        row.slicewise = bmo_slicewise(b);
        row.ratio = row.slicewise > 0.0 ? row.bmo / row.slicewise
                                        : std::numeric_limits<double>::quiet_NaN();
        if (std::isfinite(row.ratio)) {
            if (!any) {
                rep.min_ratio = rep.max_ratio = row.ratio;
                any = true;
            } else {
                rep.min_ratio = std::min(rep.min_ratio, row.ratio);
                rep.max_ratio = std::max(rep.max_ratio, row.ratio);
            }
        }
        rep.rows.push_back(std::move(row));
    }
    return rep;
}

} // namespace h1fact
