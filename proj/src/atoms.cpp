#include "h1fact/atoms.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace h1fact {

namespace {

// per-cell support check: max |value| over cells not inside rect
double support_slack_of(const GridFunction& f, const Rect& rect, double tol) {
    const Grid2D& g = f.grid();
    double slack = 0.0;
    const double tx = tol * rect.x.length(), ty = tol * rect.y.length();
    for (index_t iy = 0; iy < g.dims[1]; ++iy) {
        double ylo = g.origin[1] + static_cast<double>(iy) * g.cell[1];
        double yhi = ylo + g.cell[1];
        bool yin = ylo >= rect.y.lo() - ty && yhi <= rect.y.hi() + ty;
        for (index_t ix = 0; ix < g.dims[0]; ++ix) {
            double v = f(ix, iy);
            if (v == 0.0) continue;
            if (yin) {
                double xlo = g.origin[0] + static_cast<double>(ix) * g.cell[0];
                double xhi = xlo + g.cell[0];
                if (xlo >= rect.x.lo() - tx && xhi <= rect.x.hi() + tx) continue;
            }
            slack = std::max(slack, std::abs(v));
        }
    }
    return slack;
}

ValidationReport validate_impl(const Rect& rect, const GridFunction& f, double q, double tol) {
    ValidationReport r;
    r.support_slack = support_slack_of(f, rect, tol);
    double area = rect.area();
    double norm = std::isinf(q) ? linf_norm(f) : lq_norm(f, q);
    double scale_pow = std::isinf(q) ? area : std::pow(area, 1.0 - 1.0 / q);
    r.bound_slack = norm * scale_pow - 1.0;
    double norm_scale = norm * area; // comparable to an integral over rect
    r.cancel_slack = norm_scale > 0.0 ? std::abs(integral(f)) / norm_scale : 0.0;
    r.pass = r.support_slack == 0.0 && r.bound_slack <= tol && r.cancel_slack <= 1e-12;
    return r;
}

double u01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

} // namespace

ValidationReport validate_atom(const Atom& a, double tol) {
    return validate_impl(a.rect, a.func, std::numeric_limits<double>::infinity(), tol);
}

ValidationReport validate_qatom(const QAtom& a, double tol) {
    if (!(a.q >= 1.0)) throw PreconditionViolated("atom exponent must be >= 1");
    return validate_impl(a.rect, a.func, a.q, tol);
}

Atom make_haar_atom(const Rect& rect, index_t n_subcells, Axis axis) {
    if (n_subcells < 2 || (n_subcells & (n_subcells - 1)) != 0)
        throw PreconditionViolated("subcell count must be a power of two, at least 2");
    Grid2D g{{rect.x.lo(), rect.y.lo()},
             {rect.x.length() / static_cast<double>(n_subcells),
              rect.y.length() / static_cast<double>(n_subcells)},
             {n_subcells, n_subcells}};
    const double amp = 1.0 / rect.area();
    std::vector<double> v(static_cast<std::size_t>(g.cell_count()));
    const index_t half = n_subcells / 2;
    for (index_t iy = 0; iy < n_subcells; ++iy)
        for (index_t ix = 0; ix < n_subcells; ++ix) {
            index_t along = axis == Axis::X ? ix : iy;
            v[static_cast<std::size_t>(iy * n_subcells + ix)] = along < half ? -amp : amp;
        }
    return Atom{rect, GridFunction(g, std::move(v))};
}

Atom random_atom(const Rect& rect, index_t n_subcells, std::uint64_t seed) {
    if (n_subcells < 2) throw PreconditionViolated("need at least 2 subcells per axis");
    Grid2D g{{rect.x.lo(), rect.y.lo()},
             {rect.x.length() / static_cast<double>(n_subcells),
              rect.y.length() / static_cast<double>(n_subcells)},
             {n_subcells, n_subcells}};
    check_cell_budget(g.cell_count(), "random_atom");
    std::mt19937_64 rng(seed);
    std::vector<double> v(static_cast<std::size_t>(g.cell_count()));
    double peak = 0.0;
    while (peak == 0.0) {
        long double mean = 0.0L;
        for (double& x : v) {
            x = 2.0 * u01(rng) - 1.0;
            mean += x;
        }
        mean /= static_cast<long double>(v.size());
        for (double& x : v) {
            x = static_cast<double>(static_cast<long double>(x) - mean);
            peak = std::max(peak, std::abs(x));
        }
    }
    const double s = 1.0 / (peak * rect.area());
    for (double& x : v) x *= s;
    return Atom{rect, GridFunction(g, std::move(v))};
}

double h1_upper_bound(const AtomicDecomposition& d) {
    double s = 0.0;
    for (const auto& t : d.terms) s += std::abs(t.coeff);
    return s;
}

GridFunction reconstruct_decomposition(const AtomicDecomposition& d) {
    if (d.terms.empty()) return GridFunction();
    GridFunction acc = scale(d.terms[0].atom.func, d.terms[0].coeff);
    for (std::size_t i = 1; i < d.terms.size(); ++i)
        acc = axpy(d.terms[i].coeff, d.terms[i].atom.func, acc);
    return acc;
}

std::pair<double, QAtom> two_atom_from_pi(const GridFunction& pi, const Rect& rect) {
    if (support_slack_of(pi, rect, 1e-9) != 0.0)
        throw PreconditionViolated("function must be supported inside the rectangle");
    double l2 = l2_norm(pi);
    if (l2 == 0.0) throw ZeroFunction("cannot normalize the zero function");
    double scale_l2 = l2 * std::sqrt(rect.area());
    if (std::abs(integral(pi)) > 1e-12 * scale_l2)
        throw MeanNotZero("function must have zero integral");
    return {scale_l2, QAtom{rect, scale(pi, 1.0 / scale_l2), 2.0}};
}

Atom normalize_atom_grid(const Atom& a) {
    const Grid2D& g = a.func.grid();
    double hx = g.cell[0], hy = g.cell[1];
    // refine odd axis counts so both dims come out even
    auto cells_along = [](double len, double h, const char* what) {
        auto k = detail::lattice_index(len, h, 1e-9);
        if (!k || *k < 1)
            throw MisalignedRect(std::string("atom rectangle does not sit on the "
                                             "function's lattice: ") + what);
        return *k;
    };
    index_t kx = cells_along(a.rect.x.length(), hx, "x");
    index_t ky = cells_along(a.rect.y.length(), hy, "y");
    if (!detail::lattice_index(a.rect.x.lo() - g.origin[0], hx, 1e-9) ||
        !detail::lattice_index(a.rect.y.lo() - g.origin[1], hy, 1e-9))
        throw MisalignedRect("atom rectangle corner is off the function's lattice");
    if (kx % 2 != 0) {
        hx *= 0.5;
        kx *= 2;
    }
    if (ky % 2 != 0) {
        hy *= 0.5;
        ky *= 2;
    }
    Grid2D span{{a.rect.x.lo(), a.rect.y.lo()}, {hx, hy}, {kx, ky}};
    GridFunction f = embed(a.func, span);
    return Atom{a.rect, coarsen(f, /*require_even_dims=*/true)};
}

} // namespace h1fact
