#include "h1fact/families.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace h1fact {

namespace {

GridFunction from_formula(index_t n, double (*f)(double, double)) {
    Grid2D g{{0.0, 0.0}, {1.0 / static_cast<double>(n), 1.0 / static_cast<double>(n)}, {n, n}};
    std::vector<double> v(static_cast<std::size_t>(n * n));
    for (index_t iy = 0; iy < n; ++iy)
        for (index_t ix = 0; ix < n; ++ix) {
            double x = (static_cast<double>(ix) + 0.5) / static_cast<double>(n);
            double y = (static_cast<double>(iy) + 0.5) / static_cast<double>(n);
            v[static_cast<std::size_t>(iy * n + ix)] = f(x, y);
        }
    return GridFunction(g, std::move(v));
}

GridFunction checkerboard(index_t n) {
    Grid2D g{{0.0, 0.0}, {1.0 / static_cast<double>(n), 1.0 / static_cast<double>(n)}, {n, n}};
    std::vector<double> v(static_cast<std::size_t>(n * n));
    for (index_t iy = 0; iy < n; ++iy)
        for (index_t ix = 0; ix < n; ++ix)
            v[static_cast<std::size_t>(iy * n + ix)] = (ix + iy) % 2 == 0 ? -1.0 : 1.0;
    return GridFunction(g, std::move(v));
}

GridFunction rand_smooth(index_t n) {
    Grid2D g{{0.0, 0.0}, {1.0 / static_cast<double>(n), 1.0 / static_cast<double>(n)}, {n, n}};
    std::mt19937_64 rng(0x9e3779b9u); // fixed: the family is versioned, not seeded
    std::vector<double> v(static_cast<std::size_t>(n * n));
    for (double& x : v) x = 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0;
    // two passes of a 3x3 box blur with clamped edges
    for (int pass = 0; pass < 2; ++pass) {
        std::vector<double> w(v.size());
        for (index_t iy = 0; iy < n; ++iy)
            for (index_t ix = 0; ix < n; ++ix) {
                double s = 0.0;
                for (index_t dy = -1; dy <= 1; ++dy)
                    for (index_t dx = -1; dx <= 1; ++dx) {
                        index_t jx = std::clamp<index_t>(ix + dx, 0, n - 1);
                        index_t jy = std::clamp<index_t>(iy + dy, 0, n - 1);
                        s += v[static_cast<std::size_t>(jy * n + jx)];
                    }
                w[static_cast<std::size_t>(iy * n + ix)] = s / 9.0;
            }
        v = std::move(w);
    }
    return GridFunction(g, std::move(v));
}

} // namespace

std::vector<std::pair<std::string, GridFunction>> symbol_family(const std::string& version,
                                                                index_t n) {
    if (version != "v1") throw PreconditionViolated("unknown symbol family version");
    if (n < 2) throw PreconditionViolated("symbol family needs at least 2 cells per axis");
    std::vector<std::pair<std::string, GridFunction>> out;
    out.emplace_back("const_one", from_formula(n, +[](double, double) { return 1.0; }));
    out.emplace_back("checkerboard", checkerboard(n));
    out.emplace_back("stripes_x",
                     from_formula(n, +[](double x, double) { return x < 0.5 ? -1.0 : 1.0; }));
    out.emplace_back("grad_diag", from_formula(n, +[](double x, double y) { return x + y - 1.0; }));
    out.emplace_back("log_radial", from_formula(n, +[](double x, double y) {
                         double r = std::hypot(x - 0.5, y - 0.5);
                         return std::log(r + 0.02);
                     }));
    out.emplace_back("rand_smooth", rand_smooth(n));
    return out;
}

Atom atom_from_family(const std::string& kind, const Rect& rect, index_t n_subcells,
                      std::uint64_t seed) {
    if (kind == "haar") return make_haar_atom(rect, n_subcells, Axis::X);
    if (kind == "haar_y") return make_haar_atom(rect, n_subcells, Axis::Y);
    if (kind == "random") return random_atom(rect, n_subcells, seed);
    throw PreconditionViolated("unknown atom family: " + kind);
}

} // namespace h1fact
