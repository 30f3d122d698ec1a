#pragma once

#include <cstdint>

#include "h1fact/grid.hpp"

namespace h1fact {

enum class Axis { X, Y };

// supported on rect, |values| <= 1/area(rect), zero integral
struct Atom {
    Rect rect;
    GridFunction func;
};

// same but normalized in L^q: ||func||_q <= area(rect)^(1/q - 1)
struct QAtom {
    Rect rect;
    GridFunction func;
    double q = 2.0;
};

struct ValidationReport {
    bool pass = false;
    double support_slack = 0.0; // max |value| on cells not inside rect
    double bound_slack = 0.0;   // norm * area^(1-1/q) - 1, <= tol passes
    double cancel_slack = 0.0;  // |integral| / (norm scale), <= 1e-12 passes
};

ValidationReport validate_atom(const Atom& a, double tol = 1e-9);
ValidationReport validate_qatom(const QAtom& a, double tol = 1e-9);

// +-1/area split into halves along the given axis, n subcells per axis
Atom make_haar_atom(const Rect& rect, index_t n_subcells, Axis axis);

// seeded mean-zero noise, normalized to touch the size bound
Atom random_atom(const Rect& rect, index_t n_subcells, std::uint64_t seed);

struct AtomicDecomposition {
    struct Term {
        double coeff = 0.0;
        Atom atom;
    };
    std::vector<Term> terms;
};

// sum of |coefficients|
double h1_upper_bound(const AtomicDecomposition& d);

GridFunction reconstruct_decomposition(const AtomicDecomposition& d);

// rescale a mean-zero function supported on rect into a coefficient and an
// L^2-normalized atom; coeff = ||pi||_2 * area^(1/2)
std::pair<double, QAtom> two_atom_from_pi(const GridFunction& pi, const Rect& rect);

// re-grid an atom's function so its grid spans rect exactly with even dims
// per axis, then merge equal cells while keeping dims even
Atom normalize_atom_grid(const Atom& a);

} // namespace h1fact
