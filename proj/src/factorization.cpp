#include "h1fact/factorization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace h1fact {

namespace {

using detail::floor_div;
using detail::lattice_index;

index_t require_index(double x, double h, const char* what) {
    auto k = lattice_index(x, h, 1e-9);
    if (!k) throw MisalignedRect(std::string("edge off the working lattice: ") + what);
    return *k;
}

} // namespace

GridFunction pi_form(const GridFunction& g, const GridFunction& h) {
    auto [ga, ha] = align(g, h);
    GridFunction tg = apply_H1H2(ga);
    GridFunction th = apply_H1H2(ha);
    std::vector<double> v(ga.values().size());
    const auto& gv = ga.values();
    const auto& hv = ha.values();
    const auto& tgv = tg.values();
    const auto& thv = th.values();
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = hv[i] * tgv[i] - gv[i] * thv[i];
    return GridFunction(ga.grid(), std::move(v));
}

int choose_M(double eps) {
    if (!(eps > 0.0) || !std::isfinite(eps))
        throw PreconditionViolated("eps must be positive and finite");
    for (index_t M = 2;; M += 2)
        if (std::log(static_cast<double>(M)) / static_cast<double>(M) < eps)
            return static_cast<int>(M);
}

ApproxResult approximate_atom_with_M(const Atom& a, int M, double eps) {
    if (M < 2 || M % 2 != 0) throw PreconditionViolated("M must be even and at least 2");
    if (!validate_atom(a).pass) throw PreconditionViolated("input atom fails validation");

    Atom an = normalize_atom_grid(a);
    const Grid2D& ag = an.func.grid();
    const index_t kx = ag.dims[0], ky = ag.dims[1];
    const double hx = ag.cell[0], hy = ag.cell[1];
    const double lx = a.rect.x.length(), ly = a.rect.y.length();
    const Rect shifted = a.rect.translated(static_cast<double>(M) * lx,
                                           static_cast<double>(M) * ly);

    Grid2D big{{a.rect.x.lo(), a.rect.y.lo()},
               {hx, hy},
               {(M + 1) * kx, (M + 1) * ky}};
    check_cell_budget(big.cell_count(), "approximate_atom");

    GridFunction f_big = indicator(big, shifted);
    GridFunction a_big = embed(an.func, big);
    double pv = eval_H1H2_point(f_big, {a.rect.x.center, a.rect.y.center});
    GridFunction g_big = scale(a_big, 1.0 / pv);
    GridFunction form = pi_form(f_big, g_big);

    ApproxResult r;
    r.M = M;
    r.eps = eps;
    r.rect = a.rect;
    r.shifted_rect = shifted;
    // compact factors: same values, small grids; pi_form of these reproduces
    // the internal computation cell for cell
    Grid2D fg{{shifted.x.lo(), shifted.y.lo()}, {hx, hy}, {kx, ky}};
    r.f = GridFunction(fg, std::vector<double>(static_cast<std::size_t>(kx * ky), 1.0));
    r.g = scale(an.func, 1.0 / pv);
    r.error = axpy(-1.0, form, a_big);
    r.w1 = restrict_to(r.error, a.rect);
    r.w2 = restrict_to(r.error, shifted);
    r.point_value = pv;
    r.c_eps = l2_norm(r.f) * l2_norm(r.g);
    return r;
}

ApproxResult approximate_atom(const Atom& a, double eps) {
    return approximate_atom_with_M(a, choose_M(eps), eps);
}

std::pair<AtomicDecomposition, DecompositionTrace>
decompose_error(const GridFunction& w, const Rect& rect, const Rect& shifted_rect, int M) {
    if (M < 2 || M % 2 != 0) throw PreconditionViolated("M must be even and at least 2");

    GridFunction w1 = restrict_to(w, rect);
    GridFunction w2 = restrict_to(w, shifted_rect);
    for (const GridFunction* part : {&w1, &w2}) {
        if (linf_norm(*part) == 0.0) continue;  // empty window, chain emits nothing
        if (part->grid().dims[0] % 2 != 0 || part->grid().dims[1] % 2 != 0)
            throw PreconditionViolated(
                "rectangles must span an even number of cells per axis");
    }
    {
        GridFunction cover = axpy(1.0, embed(w1, w.grid()), embed(w2, w.grid()));
        if (linf_norm(axpy(-1.0, cover, w)) != 0.0)
            throw PreconditionViolated("support must lie inside the two rectangles");
    }
    double linf_w = linf_norm(w);
    double mean_scale = std::max(linf_w * (rect.area() + shifted_rect.area()), 1e-300);
    if (std::abs(integral(w)) > 1e-12 * mean_scale)
        throw PreconditionViolated("integral must vanish");

    AtomicDecomposition dec;
    DecompositionTrace tr;

    int i0 = 1;
    while (i0 < 60 && !rect_contains(rect.dilated(std::ldexp(1.0, i0)), shifted_rect, 1e-9))
        ++i0;
    if (i0 >= 60) throw PreconditionViolated("rectangles are too far apart");
    tr.i0 = i0;

    const double lx = rect.x.length(), ly = rect.y.length();
    Rect rbar = make_rect(0.5 * (rect.x.center + shifted_rect.x.center),
                          0.5 * (rect.y.center + shifted_rect.y.center),
                          std::ldexp(lx, i0), std::ldexp(ly, i0));
    tr.tail_rect = rbar;
    check_cell_budget((index_t{1} << (i0 + 2)) * (index_t{1} << (i0 + 2)), "decompose_error");

    tr.chain_integral[0] = integral(w1);
    tr.chain_integral[1] = integral(w2);

    auto push = [&](int chain, int level, const Rect& r, GridFunction piece) {
        double alpha = linf_norm(piece) * r.area();
        if (alpha == 0.0) return;
        Atom at{r, coarsen(scale(piece, 1.0 / alpha), /*require_even_dims=*/true)};
        dec.terms.push_back({alpha, std::move(at)});
        tr.steps.push_back({chain, level, r, alpha});
        tr.mass += alpha;
    };

    const GridFunction* parts[2] = {&w1, &w2};
    const Rect bases[2] = {rect, shifted_rect};
    for (int j = 0; j < 2; ++j) {
        const Rect& S = bases[j];
        const GridFunction& fj = *parts[j];
        const double Ij = tr.chain_integral[j];

        // level 1: fj minus its average spread over the doubled rectangle
        Rect S2 = S.dilated(2.0);
        Grid2D g2{{S2.x.lo(), S2.y.lo()},
                  fj.grid().cell,
                  {2 * fj.grid().dims[0], 2 * fj.grid().dims[1]}};
        GridFunction p1 = embed(fj, g2);
        {
            double c1 = Ij / S2.area();
            std::vector<double> v = p1.values();
            for (double& x : v) x -= c1;
            p1 = GridFunction(g2, std::move(v));
        }
        push(j + 1, 1, S2, std::move(p1));

        if (Ij == 0.0) continue; // the remaining pieces all carry a factor of Ij

        // levels 2..i0: difference of averages over consecutive dilations,
        // a 3:-1 two-ring profile on a 4x4 grid
        for (int i = 2; i <= i0; ++i) {
            Rect Si = S.dilated(std::ldexp(1.0, i));
            Grid2D gi{{Si.x.lo(), Si.y.lo()},
                      {std::ldexp(lx, i - 2), std::ldexp(ly, i - 2)},
                      {4, 4}};
            double v_out = -Ij / Si.area();
            double v_in = Ij / S.dilated(std::ldexp(1.0, i - 1)).area() - Ij / Si.area();
            std::vector<double> v(16, v_out);
            for (index_t iy = 1; iy <= 2; ++iy)
                for (index_t ix = 1; ix <= 2; ++ix)
                    v[static_cast<std::size_t>(iy * 4 + ix)] = v_in;
            push(j + 1, i, Si, GridFunction(gi, std::move(v)));
        }

        // tail: last average minus the average over the common rectangle
        Rect si0 = S.dilated(std::ldexp(1.0, i0));
        index_t nt = index_t{1} << (i0 + 2);
        Grid2D gt{{rbar.x.lo(), rbar.y.lo()}, {0.5 * lx, 0.5 * ly}, {nt, nt}};
        double v_bar = Ij / rbar.area();
        double v_i0 = Ij / si0.area();
        std::vector<double> v(static_cast<std::size_t>(nt * nt), -v_bar);
        index_t jx0 = require_index(si0.x.lo() - gt.origin[0], gt.cell[0], "tail x");
        index_t jx1 = require_index(si0.x.hi() - gt.origin[0], gt.cell[0], "tail x");
        index_t jy0 = require_index(si0.y.lo() - gt.origin[1], gt.cell[1], "tail y");
        index_t jy1 = require_index(si0.y.hi() - gt.origin[1], gt.cell[1], "tail y");
        for (index_t iy = jy0; iy < jy1; ++iy)
            for (index_t ix = jx0; ix < jx1; ++ix)
                v[static_cast<std::size_t>(iy * nt + ix)] += v_i0;
        push(j + 1, i0 + 1, bounding_rect(rbar, si0), GridFunction(gt, std::move(v)));
    }

    tr.c_measured = tr.mass * static_cast<double>(M) / std::log(static_cast<double>(M));
    return {std::move(dec), std::move(tr)};
}

ResidualNorms decomposition_residual(const GridFunction& target, const AtomicDecomposition& dec) {
    struct Source {
        const GridFunction* f;
        double coeff;
        index_t px, py, kx, ky;
    };
    std::vector<Source> srcs;
    srcs.push_back({&target, 1.0, 1, 1, 0, 0});
    for (const auto& t : dec.terms) srcs.push_back({&t.atom.func, -t.coeff, 1, 1, 0, 0});

    double h[2];
    for (int a = 0; a < 2; ++a) {
        h[a] = target.grid().cell[a];
        for (const auto& s : srcs) {
            h[a] = detail::real_gcd(h[a], s.f->grid().cell[a]);
            double off = std::abs(s.f->grid().origin[a] - target.grid().origin[a]);
            if (off > 1e-9 * h[a]) h[a] = detail::real_gcd(h[a], off);
        }
        // anchor exactly on the target lattice
        double pr = target.grid().cell[a] / h[a];
        index_t p = static_cast<index_t>(std::llround(pr));
        if (p < 1) throw LatticeMismatch("no common lattice for residual evaluation");
        h[a] = target.grid().cell[a] / static_cast<double>(p);
    }

    index_t lo[2] = {0, 0}, hi[2] = {0, 0};
    bool first = true;
    for (auto& s : srcs) {
        index_t pk[2], kk[2];
        for (int a = 0; a < 2; ++a) {
            double pr = s.f->grid().cell[a] / h[a];
            pk[a] = static_cast<index_t>(std::llround(pr));
            if (pk[a] < 1 || std::abs(pr - static_cast<double>(pk[a])) > 1e-6 * static_cast<double>(pk[a]))
                throw LatticeMismatch("no common lattice for residual evaluation");
            double kr = (s.f->grid().origin[a] - target.grid().origin[a]) / h[a];
            kk[a] = static_cast<index_t>(std::llround(kr));
            if (std::abs(kr - static_cast<double>(kk[a])) > 1e-6)
                throw LatticeMismatch("source origin off the residual lattice");
        }
        s.px = pk[0];
        s.py = pk[1];
        s.kx = kk[0];
        s.ky = kk[1];
        for (int a = 0; a < 2; ++a) {
            index_t l = kk[a];
            index_t r = kk[a] + s.f->grid().dims[a] * pk[a];
            if (first) {
                lo[a] = l;
                hi[a] = r;
            } else {
                lo[a] = std::min(lo[a], l);
                hi[a] = std::max(hi[a], r);
            }
        }
        first = false;
    }

    const index_t ncols = hi[0] - lo[0];
    std::vector<double> row(static_cast<std::size_t>(ncols));
    long double sumsq = 0.0L;
    double peak = 0.0;
    for (index_t gy = lo[1]; gy < hi[1]; ++gy) {
        std::fill(row.begin(), row.end(), 0.0);
        for (const auto& s : srcs) {
            index_t sy = floor_div(gy - s.ky, s.py);
            if (sy < 0 || sy >= s.f->grid().dims[1]) continue;
            const double* srow =
                s.f->values().data() + static_cast<std::size_t>(sy * s.f->grid().dims[0]);
            index_t gx0 = std::max(lo[0], s.kx);
            index_t gx1 = std::min(hi[0], s.kx + s.f->grid().dims[0] * s.px);
            index_t gx = gx0;
            while (gx < gx1) {
                index_t sx = floor_div(gx - s.kx, s.px);
                index_t run_end = std::min(gx1, s.kx + (sx + 1) * s.px);
                double add = s.coeff * srow[sx];
                if (add != 0.0)
                    for (index_t t = gx; t < run_end; ++t)
                        row[static_cast<std::size_t>(t - lo[0])] += add;
                gx = run_end;
            }
        }
        for (double v : row) {
            sumsq += static_cast<long double>(v) * v;
            peak = std::max(peak, std::abs(v));
        }
    }
    ResidualNorms rn;
    rn.l2 = std::sqrt(static_cast<double>(sumsq * static_cast<long double>(h[0]) * h[1]));
    rn.linf = peak;
    return rn;
}

Factorization weak_factorize(const AtomicDecomposition& input, double eps, int k_max,
                             double mass_tol, EpsSchedule schedule) {
    if (k_max < 0) throw PreconditionViolated("k_max must be nonnegative");
    if (mass_tol < 0.0) throw PreconditionViolated("mass_tol must be nonnegative");
    for (const auto& t : input.terms)
        if (!validate_atom(t.atom).pass)
            throw PreconditionViolated("input decomposition contains an invalid atom");

    Factorization F;
    F.eps = eps;
    F.k_max = k_max;
    F.mass_tol = mass_tol;
    F.schedule = schedule;
    try {
        F.input_l2 = input.terms.empty() ? 0.0 : l2_norm(reconstruct_decomposition(input));
    } catch (const BudgetExceeded&) {
        F.input_l2 = std::numeric_limits<double>::quiet_NaN();
    }

    std::vector<AtomicDecomposition::Term> current = input.terms;
    auto mass_of = [](const std::vector<AtomicDecomposition::Term>& ts) {
        double m = 0.0;
        for (const auto& t : ts) m += std::abs(t.coeff);
        return m;
    };

    for (int k = 1; k <= k_max; ++k) {
        double m = mass_of(current);
        if (current.empty() || m < mass_tol) break;
        double eps_k = schedule == EpsSchedule::Halving ? eps * std::ldexp(1.0, -(k - 1)) : eps;
        int M_k = choose_M(eps_k);

        F.history.push_back(m);
        FactorLevel lvl;
        lvl.M = M_k;
        lvl.eps = eps_k;
        lvl.mass_in = m;
        lvl.n_atoms_in = static_cast<index_t>(current.size());

        // negligible coefficients ride through unchanged instead of spawning
        // a full approximation of their own
        const double floor_coeff = 1e-14 * m;
        std::vector<AtomicDecomposition::Term> next;
        for (const auto& term : current) {
            if (std::abs(term.coeff) <= floor_coeff) {
                next.push_back(term);
                continue;
            }
            ApproxResult res = approximate_atom_with_M(term.atom, M_k, eps_k);
            auto [d, trace] = decompose_error(res.error, res.rect, res.shifted_rect, M_k);
            lvl.terms.push_back({k, term.coeff, res.f, res.g});
            lvl.sum_coeff_c += std::abs(term.coeff) * res.c_eps;
            F.max_c_eps = std::max(F.max_c_eps, res.c_eps);
            ResidualNorms rn = decomposition_residual(res.error, d);
            lvl.residual_abs += std::abs(term.coeff) * rn.l2;
            for (const auto& piece : d.terms)
                next.push_back({term.coeff * piece.coeff, piece.atom});
        }
        F.levels.push_back(std::move(lvl));
        current = std::move(next);
    }

    F.residual.terms = std::move(current);
    F.residual_mass = mass_of(F.residual.terms);
    std::vector<double> seq = F.history;
    seq.push_back(F.residual_mass);
    for (std::size_t i = 1; i < seq.size(); ++i)
        if (seq[i] >= seq[i - 1]) F.non_convergence = true;
    return F;
}

GridFunction reconstruct_factorization(const Factorization& fact) {
    GridFunction acc;
    bool have = false;
    for (const auto& lvl : fact.levels)
        for (const auto& t : lvl.terms) {
            GridFunction contrib = scale(pi_form(t.g, t.h), t.coeff);
            acc = have ? axpy(1.0, contrib, acc) : std::move(contrib);
            have = true;
        }
    if (!fact.residual.terms.empty()) {
        GridFunction rest = reconstruct_decomposition(fact.residual);
        acc = have ? axpy(1.0, rest, acc) : std::move(rest);
        have = true;
    }
    return have ? acc : GridFunction();
}

} // namespace h1fact
