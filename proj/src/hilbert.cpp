#include "h1fact/hilbert.hpp"

#include <cmath>

namespace h1fact {

namespace {

// phi(d) for d >= 1 in a cancellation-free form:
// (d+1)ln(d+1) + (d-1)ln(d-1) - 2d ln(d) = d*log1p(-1/d^2) + log1p(2/(d-1))
double phi_pos(double d) {
    if (d == 1.0) return 2.0 * std::log(2.0);
    return d * std::log1p(-1.0 / (d * d)) + std::log1p(2.0 / (d - 1.0));
}

std::vector<double> phi_table(index_t n) {
    std::vector<double> t(static_cast<std::size_t>(2 * n - 1), 0.0);
    for (index_t d = 1; d < n; ++d) {
        double p = phi_pos(static_cast<double>(d));
        t[static_cast<std::size_t>(n - 1 + d)] = p;
        t[static_cast<std::size_t>(n - 1 - d)] = -p;
    }
    return t;
}

// out[i] = sum_j phi(j-i) in[j], summed over the nonzero run of in;
// adding zero terms never changes a float sum, so the run restriction is
// bitwise identical to the dense loop
void transform_line(const double* in, index_t n, const double* phi0, double* out) {
    index_t j0 = 0, j1 = n;
    while (j0 < n && in[j0] == 0.0) ++j0;
    while (j1 > j0 && in[j1 - 1] == 0.0) --j1;
    if (j0 == j1) {
        for (index_t i = 0; i < n; ++i) out[i] = 0.0;
        return;
    }
    for (index_t i = 0; i < n; ++i) {
        double s = 0.0;
        const double* ph = phi0 + (j0 - i);
        for (index_t j = j0; j < j1; ++j) s += ph[j - j0] * in[j];
        out[i] = s;
    }
}

} // namespace

double hilbert_phi(index_t d) {
    if (d == 0) return 0.0;
    if (d < 0) return -phi_pos(static_cast<double>(-d));
    return phi_pos(static_cast<double>(d));
}

HilbertMatrix1D::HilbertMatrix1D(index_t n, double cell_width) : n_(n), w_(cell_width) {
    if (n < 1) throw PreconditionViolated("matrix size must be at least 1");
    if (!(cell_width > 0.0)) throw PreconditionViolated("cell width must be positive");
    phi_ = phi_table(n);
}

std::vector<double> HilbertMatrix1D::dense() const {
    std::vector<double> m(static_cast<std::size_t>(n_ * n_));
    for (index_t i = 0; i < n_; ++i)
        for (index_t j = 0; j < n_; ++j)
            m[static_cast<std::size_t>(i * n_ + j)] = entry(i, j);
    return m;
}

HilbertMatrix1D build_hilbert_matrix(index_t n, double cell_width) {
    return HilbertMatrix1D(n, cell_width);
}

GridFunction apply_H1(const GridFunction& f) {
    const Grid2D& g = f.grid();
    const index_t nx = g.dims[0], ny = g.dims[1];
    std::vector<double> phi = phi_table(nx);
    const double* phi0 = phi.data() + (nx - 1);
    std::vector<double> out(f.values().size());
    for (index_t iy = 0; iy < ny; ++iy)
        transform_line(f.values().data() + static_cast<std::size_t>(iy * nx), nx, phi0,
                       out.data() + static_cast<std::size_t>(iy * nx));
    return GridFunction(g, std::move(out));
}

GridFunction apply_H2(const GridFunction& f) {
    const Grid2D& g = f.grid();
    const index_t nx = g.dims[0], ny = g.dims[1];
    std::vector<double> phi = phi_table(ny);
    const double* phi0 = phi.data() + (ny - 1);
    std::vector<double> out(f.values().size());
    std::vector<double> col(static_cast<std::size_t>(ny)), res(static_cast<std::size_t>(ny));
    for (index_t ix = 0; ix < nx; ++ix) {
        for (index_t iy = 0; iy < ny; ++iy)
            col[static_cast<std::size_t>(iy)] = f.values()[static_cast<std::size_t>(iy * nx + ix)];
        transform_line(col.data(), ny, phi0, res.data());
        for (index_t iy = 0; iy < ny; ++iy)
            out[static_cast<std::size_t>(iy * nx + ix)] = res[static_cast<std::size_t>(iy)];
    }
    return GridFunction(g, std::move(out));
}

GridFunction apply_H1H2(const GridFunction& f) { return apply_H2(apply_H1(f)); }

double eval_H1H2_point(const GridFunction& f, std::array<double, 2> p) {
    const Grid2D& g = f.grid();
    const auto& v = f.values();
    const index_t nx = g.dims[0], ny = g.dims[1];
    index_t x0 = nx, x1 = -1, y0 = ny, y1 = -1;
    for (index_t iy = 0; iy < ny; ++iy)
        for (index_t ix = 0; ix < nx; ++ix)
            if (v[static_cast<std::size_t>(iy * nx + ix)] != 0.0) {
                x0 = std::min(x0, ix);
                x1 = std::max(x1, ix);
                y0 = std::min(y0, iy);
                y1 = std::max(y1, iy);
            }
    if (x1 < 0) return 0.0;

    const index_t lo[2] = {x0, y0}, hi[2] = {x1, y1};
    for (int a = 0; a < 2; ++a) {
        double slo = g.origin[a] + static_cast<double>(lo[a]) * g.cell[a];
        double shi = g.origin[a] + static_cast<double>(hi[a] + 1) * g.cell[a];
        double margin = g.cell[a] * (1.0 - 1e-9);
        if (p[a] > slo - margin && p[a] < shi + margin)
            throw PointTooCloseToSupport(
                "evaluation point must be at least one cell away from the support in each axis");
    }

    // integrating 1/(x-p) over a cell gives ln|edge hi - p| - ln|edge lo - p|
    std::vector<double> fx(static_cast<std::size_t>(x1 - x0 + 1));
    std::vector<double> fy(static_cast<std::size_t>(y1 - y0 + 1));
    for (index_t ix = x0; ix <= x1; ++ix) {
        double a = g.origin[0] + static_cast<double>(ix) * g.cell[0];
        double b = a + g.cell[0];
        fx[static_cast<std::size_t>(ix - x0)] =
            std::log(std::abs(b - p[0])) - std::log(std::abs(a - p[0]));
    }
    for (index_t iy = y0; iy <= y1; ++iy) {
        double a = g.origin[1] + static_cast<double>(iy) * g.cell[1];
        double b = a + g.cell[1];
        fy[static_cast<std::size_t>(iy - y0)] =
            std::log(std::abs(b - p[1])) - std::log(std::abs(a - p[1]));
    }
    long double s = 0.0L;
    for (index_t iy = y0; iy <= y1; ++iy) {
        long double row = 0.0L;
        for (index_t ix = x0; ix <= x1; ++ix) {
            double c = v[static_cast<std::size_t>(iy * nx + ix)];
            if (c != 0.0) row += static_cast<long double>(c) * fx[static_cast<std::size_t>(ix - x0)];
        }
        s += row * fy[static_cast<std::size_t>(iy - y0)];
    }
    return static_cast<double>(s);
}

} // namespace h1fact
