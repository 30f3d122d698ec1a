#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "h1fact/errors.hpp"

namespace h1fact {

using index_t = std::int64_t;

// closed interval stored as center/halfwidth so that dilation is exact
struct Interval {
    double center = 0.0;
    double halfwidth = 0.0;

    double lo() const { return center - halfwidth; }
    double hi() const { return center + halfwidth; }
    double length() const { return 2.0 * halfwidth; }
};

Interval make_interval(double center, double halfwidth);
Interval interval_from_endpoints(double lo, double hi);

struct Rect {
    Interval x;
    Interval y;

    double area() const { return x.length() * y.length(); }
    std::array<double, 2> center() const { return {x.center, y.center}; }
    Rect translated(double dx, double dy) const;
    Rect dilated(double factor) const; // concentric
};

Rect make_rect(double cx, double cy, double hx, double hy);
// smallest rectangle containing both
Rect bounding_rect(const Rect& a, const Rect& b);
// b inside a, up to tol relative to a's sidelengths
bool rect_contains(const Rect& outer, const Rect& inner, double rel_tol = 1e-9);

// uniform cell grid; cell (ix, iy) covers
// [origin[0]+ix*cell[0], origin[0]+(ix+1)*cell[0]) x [... iy ...)
struct Grid2D {
    std::array<double, 2> origin = {0.0, 0.0};
    std::array<double, 2> cell = {1.0, 1.0};
    std::array<index_t, 2> dims = {1, 1};

    index_t cell_count() const { return dims[0] * dims[1]; }
    double cell_area() const { return cell[0] * cell[1]; }
    double xmax() const { return origin[0] + cell[0] * static_cast<double>(dims[0]); }
    double ymax() const { return origin[1] + cell[1] * static_cast<double>(dims[1]); }
    Rect extent() const;
    bool operator==(const Grid2D& o) const = default;
};

Grid2D make_grid(std::array<double, 2> origin, std::array<double, 2> cell,
                 std::array<index_t, 2> dims);

// piecewise-constant function on a Grid2D, row-major values[iy*nx + ix]
class GridFunction {
public:
    GridFunction() : grid_{}, values_(1, 0.0) {}
    GridFunction(Grid2D grid, std::vector<double> values);

    const Grid2D& grid() const { return grid_; }
    const std::vector<double>& values() const { return values_; }
    double operator()(index_t ix, index_t iy) const {
        return values_[static_cast<std::size_t>(iy * grid_.dims[0] + ix)];
    }

    static GridFunction zeros(const Grid2D& g);

private:
    Grid2D grid_;
    std::vector<double> values_;
};

// global cap on cells materialized by align/embed/reconstruction, default 1<<24
index_t cell_budget();
void set_cell_budget(index_t cells);

void check_cell_budget(index_t cells, const char* where);

GridFunction indicator(const Grid2D& grid, const Rect& rect);

double integral(const GridFunction& f);
double l2_norm(const GridFunction& f);
double linf_norm(const GridFunction& f);
double lq_norm(const GridFunction& f, double q);

// pointwise binary ops; arguments are aligned internally
double inner_product(const GridFunction& f, const GridFunction& g);
GridFunction product(const GridFunction& f, const GridFunction& g);
// a*f + g
GridFunction axpy(double a, const GridFunction& f, const GridFunction& g);
GridFunction scale(const GridFunction& f, double c);

// common refinement covering the union of both extents
std::pair<GridFunction, GridFunction> align(const GridFunction& f, const GridFunction& g);

// resample onto target; nonzero support falling outside target throws OutOfExtent
GridFunction embed(const GridFunction& f, const Grid2D& target);

// sub-function on the cells of f lying inside rect (rect edges must sit on f's lattice)
GridFunction restrict_to(const GridFunction& f, const Rect& rect);

// drop zero rows/columns at the boundary; all-zero input collapses to one cell
GridFunction trim(const GridFunction& f);

// merge equal-valued cell pairs into coarser cells where possible;
// require_even_dims keeps both dims even (stops 6->3 and 2->1 merges)
GridFunction coarsen(const GridFunction& f, bool require_even_dims = false);

namespace detail {

// floor division for possibly negative numerators
index_t floor_div(index_t a, index_t b);

// nearest lattice index of x on {k*h}, empty if farther than rel_tol*h
std::optional<index_t> lattice_index(double x, double h, double rel_tol = 1e-6);
// gcd of positive reals via Euclid with residue snapping; throws LatticeMismatch
// when the iteration drops below ~2^-26 of max(a,b) without terminating
double real_gcd(double a, double b);

} // namespace detail

} // namespace h1fact
