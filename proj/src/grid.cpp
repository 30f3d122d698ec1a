#include "h1fact/grid.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>

namespace h1fact {

namespace {

std::atomic<index_t> g_cell_budget{index_t{1} << 24};

void require(bool ok, const char* msg) {
    if (!ok) throw PreconditionViolated(msg);
}

using detail::floor_div;

struct AxisMap {
    double h = 1.0;     // common cell width
    index_t i_lo = 0;   // first fine index (relative to f's origin)
    index_t n = 0;      // fine cells in target
    index_t pf = 1, pg = 1; // source cells measured in fine cells
    index_t kg = 0;     // g's origin offset in fine cells
    index_t nf = 0, ng = 0;
};

AxisMap axis_map(double of, double hf, index_t nf, double og, double hg, index_t ng) {
    AxisMap m;
    double h = detail::real_gcd(hf, hg);
    const double off = og - of;
    if (std::abs(off) > 1e-9 * h) h = detail::real_gcd(std::abs(off), h);

    double pf_r = hf / h;
    index_t pf = static_cast<index_t>(std::llround(pf_r));
    if (pf < 1 || std::abs(pf_r - static_cast<double>(pf)) > 1e-6 * static_cast<double>(pf))
        throw LatticeMismatch("grids do not share a usable common lattice");
    h = hf / static_cast<double>(pf); // anchor the fine lattice exactly on f

    double pg_r = hg / h;
    index_t pg = static_cast<index_t>(std::llround(pg_r));
    if (pg < 1 || std::abs(pg_r - static_cast<double>(pg)) > 1e-6 * static_cast<double>(pg))
        throw LatticeMismatch("grids do not share a usable common lattice");

    double kg_r = off / h;
    index_t kg = static_cast<index_t>(std::llround(kg_r));
    if (std::abs(kg_r - static_cast<double>(kg)) > 1e-6)
        throw LatticeMismatch("grid origins are not on the common lattice");

    m.h = h;
    m.pf = pf;
    m.pg = pg;
    m.kg = kg;
    m.nf = nf;
    m.ng = ng;
    m.i_lo = std::min<index_t>(0, kg);
    m.n = std::max<index_t>(nf * pf, kg + ng * pg) - m.i_lo;
    return m;
}

// fine index range shared by both extents; empty when hi <= lo
std::pair<index_t, index_t> overlap_range(const AxisMap& m) {
    index_t lo = std::max<index_t>(0, m.kg);
    index_t hi = std::min<index_t>(m.nf * m.pf, m.kg + m.ng * m.pg);
    return {lo, hi};
}

std::array<AxisMap, 2> grid_maps(const Grid2D& a, const Grid2D& b) {
    try {
        return {axis_map(a.origin[0], a.cell[0], a.dims[0], b.origin[0], b.cell[0], b.dims[0]),
                axis_map(a.origin[1], a.cell[1], a.dims[1], b.origin[1], b.cell[1], b.dims[1])};
    } catch (const LatticeMismatch& e) {
        throw IncompatibleGrids(e.what());
    }
}

} // namespace

Interval make_interval(double center, double halfwidth) {
    require(std::isfinite(center) && std::isfinite(halfwidth), "interval endpoints must be finite");
    require(halfwidth > 0.0, "interval halfwidth must be positive");
    return Interval{center, halfwidth};
}

Interval interval_from_endpoints(double lo, double hi) {
    return make_interval(0.5 * (lo + hi), 0.5 * (hi - lo));
}

Rect Rect::translated(double dx, double dy) const {
    return Rect{Interval{x.center + dx, x.halfwidth}, Interval{y.center + dy, y.halfwidth}};
}

Rect Rect::dilated(double factor) const {
    require(factor > 0.0, "dilation factor must be positive");
    return Rect{Interval{x.center, x.halfwidth * factor}, Interval{y.center, y.halfwidth * factor}};
}

Rect make_rect(double cx, double cy, double hx, double hy) {
    return Rect{make_interval(cx, hx), make_interval(cy, hy)};
}

Rect bounding_rect(const Rect& a, const Rect& b) {
    double lx = std::min(a.x.lo(), b.x.lo());
    double hx = std::max(a.x.hi(), b.x.hi());
    double ly = std::min(a.y.lo(), b.y.lo());
    double hy = std::max(a.y.hi(), b.y.hi());
    return Rect{interval_from_endpoints(lx, hx), interval_from_endpoints(ly, hy)};
}

bool rect_contains(const Rect& outer, const Rect& inner, double rel_tol) {
    double tx = rel_tol * outer.x.length();
    double ty = rel_tol * outer.y.length();
    return inner.x.lo() >= outer.x.lo() - tx && inner.x.hi() <= outer.x.hi() + tx &&
           inner.y.lo() >= outer.y.lo() - ty && inner.y.hi() <= outer.y.hi() + ty;
}

Rect Grid2D::extent() const {
    return Rect{interval_from_endpoints(origin[0], xmax()),
                interval_from_endpoints(origin[1], ymax())};
}

Grid2D make_grid(std::array<double, 2> origin, std::array<double, 2> cell,
                 std::array<index_t, 2> dims) {
    require(std::isfinite(origin[0]) && std::isfinite(origin[1]), "grid origin must be finite");
    require(std::isfinite(cell[0]) && std::isfinite(cell[1]) && cell[0] > 0.0 && cell[1] > 0.0,
            "grid cells must be positive");
    require(dims[0] >= 1 && dims[1] >= 1, "grid dims must be at least 1");
    return Grid2D{origin, cell, dims};
}

GridFunction::GridFunction(Grid2D grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
    require(static_cast<index_t>(values_.size()) == grid_.cell_count(),
            "value count does not match grid dims");
}

GridFunction GridFunction::zeros(const Grid2D& g) {
    check_cell_budget(g.cell_count(), "zeros");
    return GridFunction(g, std::vector<double>(static_cast<std::size_t>(g.cell_count()), 0.0));
}

index_t cell_budget() { return g_cell_budget.load(); }

void set_cell_budget(index_t cells) {
    if (cells < 1) throw PreconditionViolated("cell budget must be positive");
    g_cell_budget.store(cells);
}

void check_cell_budget(index_t cells, const char* where) {
    if (cells > g_cell_budget.load())
        throw CellBudgetExceeded(std::string(where) + ": " + std::to_string(cells) +
                                 " cells exceed budget of " + std::to_string(g_cell_budget.load()));
}

namespace detail {

index_t floor_div(index_t a, index_t b) {
    index_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

std::optional<index_t> lattice_index(double x, double h, double rel_tol) {
    double r = x / h;
    index_t k = static_cast<index_t>(std::llround(r));
    double err = std::abs(x - static_cast<double>(k) * h);
    double tol = std::max(rel_tol * h, 8.0 * std::numeric_limits<double>::epsilon() * std::abs(x));
    if (err <= tol) return k;
    return std::nullopt;
}

double real_gcd(double a, double b) {
    a = std::abs(a);
    b = std::abs(b);
    if (a < b) std::swap(a, b);
    const double scale = a;
    const double snap = 1e-7;
    const double floor_val = scale * std::ldexp(1.0, -26);
    while (b > 0.0) {
        if (b < floor_val) throw LatticeMismatch("no common lattice within tolerance");
        double r = std::fmod(a, b);
        if (r < snap * b || b - r < snap * b) r = 0.0;
        a = b;
        b = r;
    }
    return a;
}

} // namespace detail

GridFunction indicator(const Grid2D& grid, const Rect& rect) {
    std::array<index_t, 2> lo{}, hi{};
    const double los[2] = {rect.x.lo(), rect.y.lo()};
    const double his[2] = {rect.x.hi(), rect.y.hi()};
    for (int a = 0; a < 2; ++a) {
        auto i0 = detail::lattice_index(los[a] - grid.origin[a], grid.cell[a], 1e-9);
        auto i1 = detail::lattice_index(his[a] - grid.origin[a], grid.cell[a], 1e-9);
        if (!i0 || !i1)
            throw MisalignedRect("rectangle edges are not on the grid lattice");
        if (*i0 < 0 || *i1 > grid.dims[a] || *i0 > *i1)
            throw OutOfExtent("rectangle not contained in the grid extent");
        lo[a] = *i0;
        hi[a] = *i1;
    }
    check_cell_budget(grid.cell_count(), "indicator");
    std::vector<double> v(static_cast<std::size_t>(grid.cell_count()), 0.0);
    const index_t nx = grid.dims[0];
    for (index_t iy = lo[1]; iy < hi[1]; ++iy)
        for (index_t ix = lo[0]; ix < hi[0]; ++ix)
            v[static_cast<std::size_t>(iy * nx + ix)] = 1.0;
    return GridFunction(grid, std::move(v));
}

double integral(const GridFunction& f) {
    long double s = 0.0L;
    for (double v : f.values()) s += v;
    return static_cast<double>(s * static_cast<long double>(f.grid().cell_area()));
}

double l2_norm(const GridFunction& f) {
    long double s = 0.0L;
    for (double v : f.values()) s += static_cast<long double>(v) * v;
    return std::sqrt(static_cast<double>(s * static_cast<long double>(f.grid().cell_area())));
}

double linf_norm(const GridFunction& f) {
    double m = 0.0;
    for (double v : f.values()) m = std::max(m, std::abs(v));
    return m;
}

double lq_norm(const GridFunction& f, double q) {
    require(q >= 1.0, "lq_norm needs q >= 1");
    if (std::isinf(q)) return linf_norm(f);
    if (q == 2.0) return l2_norm(f);
    long double s = 0.0L;
    for (double v : f.values()) s += std::pow(static_cast<long double>(std::abs(v)), q);
    s *= static_cast<long double>(f.grid().cell_area());
    return static_cast<double>(std::pow(s, 1.0L / static_cast<long double>(q)));
}

GridFunction scale(const GridFunction& f, double c) {
    std::vector<double> v = f.values();
    for (double& x : v) x *= c;
    return GridFunction(f.grid(), std::move(v));
}

std::pair<GridFunction, GridFunction> align(const GridFunction& f, const GridFunction& g) {
    if (f.grid() == g.grid()) return {f, g};
    std::array<AxisMap, 2> m{
        axis_map(f.grid().origin[0], f.grid().cell[0], f.grid().dims[0],
                 g.grid().origin[0], g.grid().cell[0], g.grid().dims[0]),
        axis_map(f.grid().origin[1], f.grid().cell[1], f.grid().dims[1],
                 g.grid().origin[1], g.grid().cell[1], g.grid().dims[1])};
    check_cell_budget(m[0].n * m[1].n, "align");
    Grid2D target{{f.grid().origin[0] + static_cast<double>(m[0].i_lo) * m[0].h,
                   f.grid().origin[1] + static_cast<double>(m[1].i_lo) * m[1].h},
                  {m[0].h, m[1].h},
                  {m[0].n, m[1].n}};

    auto resample = [&](const GridFunction& src, bool is_g) {
        std::vector<double> out(static_cast<std::size_t>(target.cell_count()), 0.0);
        const index_t px = is_g ? m[0].pg : m[0].pf;
        const index_t py = is_g ? m[1].pg : m[1].pf;
        const index_t kx = is_g ? m[0].kg : 0;
        const index_t ky = is_g ? m[1].kg : 0;
        const index_t snx = src.grid().dims[0];
        const index_t sny = src.grid().dims[1];
        const auto& sv = src.values();
        for (index_t iy = 0; iy < m[1].n; ++iy) {
            index_t sy = floor_div(m[1].i_lo + iy - ky, py);
            if (sy < 0 || sy >= sny) continue;
            double* row = out.data() + static_cast<std::size_t>(iy * m[0].n);
            const double* srow = sv.data() + static_cast<std::size_t>(sy * snx);
            for (index_t ix = 0; ix < m[0].n; ++ix) {
                index_t sx = floor_div(m[0].i_lo + ix - kx, px);
                if (sx >= 0 && sx < snx) row[ix] = srow[sx];
            }
        }
        return GridFunction(target, std::move(out));
    };
    return {resample(f, false), resample(g, true)};
}

GridFunction axpy(double a, const GridFunction& f, const GridFunction& g) {
    if (f.grid() == g.grid()) {
        std::vector<double> v = g.values();
        const auto& fv = f.values();
        for (std::size_t i = 0; i < v.size(); ++i) v[i] += a * fv[i];
        return GridFunction(f.grid(), std::move(v));
    }
    GridFunction fa, ga;
    try {
        std::tie(fa, ga) = align(f, g);
    } catch (const LatticeMismatch& e) {
        throw IncompatibleGrids(e.what());
    }
    return axpy(a, fa, ga);
}

GridFunction product(const GridFunction& f, const GridFunction& g) {
    if (f.grid() == g.grid()) {
        std::vector<double> v = f.values();
        const auto& gv = g.values();
        for (std::size_t i = 0; i < v.size(); ++i) v[i] *= gv[i];
        return GridFunction(f.grid(), std::move(v));
    }
    // the product lives on the intersection; build only that part
    auto m = grid_maps(f.grid(), g.grid());
    auto [lx, hx] = overlap_range(m[0]);
    auto [ly, hy] = overlap_range(m[1]);
    if (hx <= lx || hy <= ly)
        return GridFunction::zeros(Grid2D{f.grid().origin, f.grid().cell, {1, 1}});
    check_cell_budget((hx - lx) * (hy - ly), "product");
    Grid2D target{{f.grid().origin[0] + static_cast<double>(lx) * m[0].h,
                   f.grid().origin[1] + static_cast<double>(ly) * m[1].h},
                  {m[0].h, m[1].h},
                  {hx - lx, hy - ly}};
    std::vector<double> out(static_cast<std::size_t>(target.cell_count()));
    const auto& fv = f.values();
    const auto& gv = g.values();
    const index_t fnx = f.grid().dims[0];
    const index_t gnx = g.grid().dims[0];
    for (index_t iy = ly; iy < hy; ++iy) {
        index_t fy = floor_div(iy, m[1].pf);
        index_t gy = floor_div(iy - m[1].kg, m[1].pg);
        double* row = out.data() + static_cast<std::size_t>((iy - ly) * target.dims[0]);
        for (index_t ix = lx; ix < hx; ++ix) {
            double a = fv[static_cast<std::size_t>(fy * fnx + floor_div(ix, m[0].pf))];
            double b = gv[static_cast<std::size_t>(gy * gnx + floor_div(ix - m[0].kg, m[0].pg))];
            row[ix - lx] = a * b;
        }
    }
    return GridFunction(target, std::move(out));
}

double inner_product(const GridFunction& f, const GridFunction& g) {
    if (f.grid() == g.grid()) {
        long double s = 0.0L;
        const auto& fv = f.values();
        const auto& gv = g.values();
        for (std::size_t i = 0; i < fv.size(); ++i)
            s += static_cast<long double>(fv[i]) * gv[i];
        return static_cast<double>(s * static_cast<long double>(f.grid().cell_area()));
    }
    auto m = grid_maps(f.grid(), g.grid());
    auto [lx, hx] = overlap_range(m[0]);
    auto [ly, hy] = overlap_range(m[1]);
    if (hx <= lx || hy <= ly) return 0.0;
    long double s = 0.0L;
    const auto& fv = f.values();
    const auto& gv = g.values();
    const index_t fnx = f.grid().dims[0];
    const index_t gnx = g.grid().dims[0];
    for (index_t iy = ly; iy < hy; ++iy) {
        index_t fy = floor_div(iy, m[1].pf);
        index_t gy = floor_div(iy - m[1].kg, m[1].pg);
        for (index_t ix = lx; ix < hx; ++ix) {
            double a = fv[static_cast<std::size_t>(fy * fnx + floor_div(ix, m[0].pf))];
            double b = gv[static_cast<std::size_t>(gy * gnx + floor_div(ix - m[0].kg, m[0].pg))];
            s += static_cast<long double>(a) * b;
        }
    }
    return static_cast<double>(s * static_cast<long double>(m[0].h) * m[1].h);
}

GridFunction embed(const GridFunction& f, const Grid2D& target) {
    index_t p[2], k[2];
    for (int a = 0; a < 2; ++a) {
        double pr = f.grid().cell[a] / target.cell[a];
        p[a] = static_cast<index_t>(std::llround(pr));
        if (p[a] < 1 || std::abs(pr - static_cast<double>(p[a])) > 1e-9 * static_cast<double>(p[a]))
            throw LatticeMismatch("embed target cell does not divide the source cell");
        double kr = (f.grid().origin[a] - target.origin[a]) / target.cell[a];
        k[a] = static_cast<index_t>(std::llround(kr));
        if (std::abs(kr - static_cast<double>(k[a])) > 1e-6)
            throw LatticeMismatch("embed origins are not on a common lattice");
    }
    // nonzero support must land inside the target extent
    GridFunction t = trim(f);
    if (linf_norm(t) > 0.0) {
        for (int a = 0; a < 2; ++a) {
            double lo_r = (t.grid().origin[a] - target.origin[a]) / target.cell[a];
            index_t lo = static_cast<index_t>(std::llround(lo_r));
            index_t hi = lo + t.grid().dims[a] * p[a];
            if (lo < 0 || hi > target.dims[a])
                throw OutOfExtent("embed: nonzero support falls outside the target extent");
        }
    }
    check_cell_budget(target.cell_count(), "embed");
    std::vector<double> out(static_cast<std::size_t>(target.cell_count()), 0.0);
    const auto& sv = f.values();
    const index_t snx = f.grid().dims[0];
    const index_t sny = f.grid().dims[1];
    for (index_t iy = 0; iy < target.dims[1]; ++iy) {
        index_t sy = floor_div(iy - k[1], p[1]);
        if (sy < 0 || sy >= sny) continue;
        double* row = out.data() + static_cast<std::size_t>(iy * target.dims[0]);
        const double* srow = sv.data() + static_cast<std::size_t>(sy * snx);
        for (index_t ix = 0; ix < target.dims[0]; ++ix) {
            index_t sx = floor_div(ix - k[0], p[0]);
            if (sx >= 0 && sx < snx) row[ix] = srow[sx];
        }
    }
    return GridFunction(target, std::move(out));
}

GridFunction restrict_to(const GridFunction& f, const Rect& rect) {
    const Grid2D& g = f.grid();
    std::array<index_t, 2> lo{}, hi{};
    const double los[2] = {rect.x.lo(), rect.y.lo()};
    const double his[2] = {rect.x.hi(), rect.y.hi()};
    for (int a = 0; a < 2; ++a) {
        auto i0 = detail::lattice_index(los[a] - g.origin[a], g.cell[a], 1e-9);
        auto i1 = detail::lattice_index(his[a] - g.origin[a], g.cell[a], 1e-9);
        if (!i0 || !i1)
            throw MisalignedRect("rectangle edges are not on the function's lattice");
        lo[a] = std::clamp<index_t>(*i0, 0, g.dims[a]);
        hi[a] = std::clamp<index_t>(*i1, 0, g.dims[a]);
    }
    if (hi[0] <= lo[0] || hi[1] <= lo[1]) {
        Grid2D empty{{los[0], los[1]}, g.cell, {1, 1}};
        return GridFunction::zeros(empty);
    }
    Grid2D sub{{g.origin[0] + static_cast<double>(lo[0]) * g.cell[0],
                g.origin[1] + static_cast<double>(lo[1]) * g.cell[1]},
               g.cell,
               {hi[0] - lo[0], hi[1] - lo[1]}};
    std::vector<double> out(static_cast<std::size_t>(sub.cell_count()));
    for (index_t iy = lo[1]; iy < hi[1]; ++iy) {
        const double* src = f.values().data() + static_cast<std::size_t>(iy * g.dims[0] + lo[0]);
        double* dst = out.data() + static_cast<std::size_t>((iy - lo[1]) * sub.dims[0]);
        std::copy(src, src + (hi[0] - lo[0]), dst);
    }
    return GridFunction(sub, std::move(out));
}

GridFunction trim(const GridFunction& f) {
    const Grid2D& g = f.grid();
    const auto& v = f.values();
    index_t x0 = g.dims[0], x1 = -1, y0 = g.dims[1], y1 = -1;
    for (index_t iy = 0; iy < g.dims[1]; ++iy)
        for (index_t ix = 0; ix < g.dims[0]; ++ix)
            if (v[static_cast<std::size_t>(iy * g.dims[0] + ix)] != 0.0) {
                x0 = std::min(x0, ix);
                x1 = std::max(x1, ix);
                y0 = std::min(y0, iy);
                y1 = std::max(y1, iy);
            }
    if (x1 < 0) return GridFunction::zeros(Grid2D{g.origin, g.cell, {1, 1}});
    Rect keep{interval_from_endpoints(g.origin[0] + static_cast<double>(x0) * g.cell[0],
                                      g.origin[0] + static_cast<double>(x1 + 1) * g.cell[0]),
              interval_from_endpoints(g.origin[1] + static_cast<double>(y0) * g.cell[1],
                                      g.origin[1] + static_cast<double>(y1 + 1) * g.cell[1])};
    return restrict_to(f, keep);
}

GridFunction coarsen(const GridFunction& f, bool require_even_dims) {
    Grid2D g = f.grid();
    std::vector<double> v = f.values();
    bool merged = true;
    while (merged) {
        merged = false;
        // x direction
        if (g.dims[0] % 2 == 0 && (!require_even_dims || (g.dims[0] / 2) % 2 == 0)) {
            bool ok = true;
            for (index_t iy = 0; iy < g.dims[1] && ok; ++iy)
                for (index_t ix = 0; ix < g.dims[0]; ix += 2)
                    if (v[static_cast<std::size_t>(iy * g.dims[0] + ix)] !=
                        v[static_cast<std::size_t>(iy * g.dims[0] + ix + 1)]) {
                        ok = false;
                        break;
                    }
            if (ok) {
                index_t nx = g.dims[0] / 2;
                std::vector<double> w(static_cast<std::size_t>(nx * g.dims[1]));
                for (index_t iy = 0; iy < g.dims[1]; ++iy)
                    for (index_t ix = 0; ix < nx; ++ix)
                        w[static_cast<std::size_t>(iy * nx + ix)] =
                            v[static_cast<std::size_t>(iy * g.dims[0] + 2 * ix)];
                v = std::move(w);
                g.dims[0] = nx;
                g.cell[0] *= 2.0;
                merged = true;
            }
        }
        // y direction
        if (g.dims[1] % 2 == 0 && (!require_even_dims || (g.dims[1] / 2) % 2 == 0)) {
            bool ok = true;
            for (index_t iy = 0; iy < g.dims[1] && ok; iy += 2)
                for (index_t ix = 0; ix < g.dims[0]; ++ix)
                    if (v[static_cast<std::size_t>(iy * g.dims[0] + ix)] !=
                        v[static_cast<std::size_t>((iy + 1) * g.dims[0] + ix)]) {
                        ok = false;
                        break;
                    }
            if (ok) {
                index_t ny = g.dims[1] / 2;
                std::vector<double> w(static_cast<std::size_t>(g.dims[0] * ny));
                for (index_t iy = 0; iy < ny; ++iy)
                    for (index_t ix = 0; ix < g.dims[0]; ++ix)
                        w[static_cast<std::size_t>(iy * g.dims[0] + ix)] =
                            v[static_cast<std::size_t>(2 * iy * g.dims[0] + ix)];
                v = std::move(w);
                g.dims[1] = ny;
                g.cell[1] *= 2.0;
                merged = true;
            }
        }
    }
    return GridFunction(g, std::move(v));
}

} // namespace h1fact
