#pragma once

#include "h1fact/atoms.hpp"
#include "h1fact/hilbert.hpp"

namespace h1fact {

// bilinear form: pi_form(g, h) = h * (H1 H2 g) - g * (H1 H2 h) on the common grid
GridFunction pi_form(const GridFunction& g, const GridFunction& h);

// smallest even M >= 2 with ln(M)/M < eps
int choose_M(double eps);

struct ApproxResult {
    int M = 0;
    double eps = 0.0;
    Rect rect;         // the atom's rectangle
    Rect shifted_rect; // rect translated by (M*lx, M*ly)
    GridFunction f;    // indicator of shifted_rect
    GridFunction g;    // atom scaled by 1/point_value
    GridFunction error; // atom - pi_form(f, g), lives on rect..shifted_rect
    GridFunction w1;   // error restricted to rect
    GridFunction w2;   // error restricted to shifted_rect
    double point_value = 0.0; // iterated transform of f at rect's center
    double c_eps = 0.0;       // ||f||_2 * ||g||_2
};

ApproxResult approximate_atom(const Atom& a, double eps);
ApproxResult approximate_atom_with_M(const Atom& a, int M, double eps);

struct DecompositionTrace {
    struct Step {
        int chain = 0; // 1 = rect side, 2 = shifted side
        int level = 0; // dilation index, tail is i0+1
        Rect rect;
        double alpha = 0.0;
    };
    std::vector<Step> steps;
    int i0 = 0;       // smallest i with shifted_rect inside 2^i * rect
    Rect tail_rect;
    double chain_integral[2] = {0.0, 0.0};
    double mass = 0.0;       // sum of |alpha|
    double c_measured = 0.0; // mass * M / ln(M)
};

// split w (supported on rect and shifted_rect, zero mean) into mean-zero
// atoms on dilated rectangles; the weighted atom sum reproduces w exactly
std::pair<AtomicDecomposition, DecompositionTrace>
decompose_error(const GridFunction& w, const Rect& rect, const Rect& shifted_rect, int M);

struct ResidualNorms {
    double l2 = 0.0;
    double linf = 0.0;
};

// norms of target - sum(coeff * atom), streamed row by row on the common
// lattice so large unions never get materialized
ResidualNorms decomposition_residual(const GridFunction& target, const AtomicDecomposition& dec);

enum class EpsSchedule { Fixed, Halving };

struct FactorTerm {
    int level = 0;
    double coeff = 0.0;
    GridFunction g; // indicator factor
    GridFunction h; // rescaled atom factor
};

struct FactorLevel {
    std::vector<FactorTerm> terms;
    int M = 0;
    double eps = 0.0;
    double mass_in = 0.0;      // sum |coeff| of atoms entering this level
    index_t n_atoms_in = 0;
    double residual_abs = 0.0; // sum |coeff| * local reconstruction residual (L2)
    double sum_coeff_c = 0.0;  // sum |coeff| * ||g||_2 * ||h||_2
};

struct Factorization {
    std::vector<FactorLevel> levels;
    AtomicDecomposition residual;
    std::vector<double> history; // mass entering each executed level
    double residual_mass = 0.0;
    bool non_convergence = false; // set when masses fail to decrease
    double eps = 0.0;
    int k_max = 0;
    double mass_tol = 0.0;
    EpsSchedule schedule = EpsSchedule::Fixed;
    double max_c_eps = 0.0;
    double input_l2 = 0.0; // NaN when the input spans too many cells to materialize
};

Factorization weak_factorize(const AtomicDecomposition& input, double eps, int k_max,
                             double mass_tol = 0.0, EpsSchedule schedule = EpsSchedule::Fixed);

// sum of all bilinear terms plus the residual atoms
GridFunction reconstruct_factorization(const Factorization& fact);

} // namespace h1fact
