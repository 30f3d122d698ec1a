#pragma once

#include "h1fact/atoms.hpp"
#include "h1fact/hilbert.hpp"
#include "h1fact/norms.hpp"

namespace h1fact {

// [b, H1H2] f = b * (H1H2 f) - H1H2 (b * f) on the common grid
GridFunction commutator_apply(const GridFunction& b, const GridFunction& f);
GridFunction commutator_apply_single(const GridFunction& b, const GridFunction& f, Axis axis);

// max absolute gap of [b, H1H2] = H1 [b, H2] + [b, H1] H2 applied to f
double aux1_identity_check(const GridFunction& b, const GridFunction& f);

struct DualityCheck {
    double lhs = 0.0; // <b, pi_form(f, g)>
    double rhs = 0.0; // <[b, H1H2] f, g>
    double abs_gap = 0.0;
};

DualityCheck duality_check(const GridFunction& b, const GridFunction& f, const GridFunction& g);

// dense matrix of the commutator, row-major over cell index iy*nx+ix;
// grids are capped at 16 cells per axis
std::vector<double> commutator_matrix(const GridFunction& b);

struct OperatorNormEstimate {
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
    double residual = 0.0;        // last relative change between estimates
    std::vector<double> history;  // estimate after each iteration
};

// largest singular value of the commutator via power iteration on its Gram
// operator; estimates grow monotonically up to roundoff
OperatorNormEstimate operator_norm(const GridFunction& b, int max_iters, double tol,
                                   std::uint64_t seed);

struct TwoSidedRow {
    std::string id;
    bool constant = false;
    double bmo = 0.0;
    double op_norm = 0.0;
    double ratio = 0.0; // op_norm / bmo
    int iterations = 0;
    double residual = 0.0;
};

struct TwoSidedReport {
    std::vector<TwoSidedRow> rows;
    double min_ratio = 0.0; // over nonconstant symbols
    double max_ratio = 0.0;
};

TwoSidedReport
two_sided_experiment(const std::vector<std::pair<std::string, GridFunction>>& symbols,
                     const RectFamily& family, int max_iters, double tol, std::uint64_t seed);

} // namespace h1fact
