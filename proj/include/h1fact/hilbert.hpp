#pragma once

#include "h1fact/grid.hpp"

namespace h1fact {

// interaction profile of the cell-averaged kernel 1/(y-x):
// phi(0) = 0, phi(-d) = -phi(d),
// phi(d) = (d+1)ln(d+1) + (d-1)ln(d-1) - 2d ln(d) for d >= 1
double hilbert_phi(index_t d);

// Galerkin matrix on n equal cells of width w: entry(i,j) = w * phi(j-i)
class HilbertMatrix1D {
public:
    HilbertMatrix1D(index_t n, double cell_width);

    index_t size() const { return n_; }
    double cell_width() const { return w_; }
    double entry(index_t i, index_t j) const {
        return w_ * phi_[static_cast<std::size_t>(j - i + n_ - 1)];
    }
    std::vector<double> dense() const;

private:
    index_t n_;
    double w_;
    std::vector<double> phi_;
};

HilbertMatrix1D build_hilbert_matrix(index_t n, double cell_width);

// cell averages of the transform of a piecewise-constant function; the
// average over cell i is sum_j phi(j-i) f_j, so cell width drops out
GridFunction apply_H1(const GridFunction& f); // along x
GridFunction apply_H2(const GridFunction& f); // along y
GridFunction apply_H1H2(const GridFunction& f);

// value of the iterated transform at a point; p must be at least one cell
// away from the support of f in each axis (PointTooCloseToSupport)
double eval_H1H2_point(const GridFunction& f, std::array<double, 2> p);

} // namespace h1fact
