#include "h1fact/serialization.hpp"

#include <cmath>
#include <limits>

namespace h1fact {

namespace {

void expect(bool ok, const char* msg) {
    if (!ok) throw Error(std::string("parse: ") + msg);
}

double finite_number(const json& j, const char* what) {
    expect(j.is_number(), what);
    double v = j.get<double>();
    expect(std::isfinite(v), what);
    return v;
}

} // namespace

json grid_function_to_json(const GridFunction& f) {
    const Grid2D& g = f.grid();
    json j;
    j["origin"] = {g.origin[0], g.origin[1]};
    j["cell"] = {g.cell[0], g.cell[1]};
    j["dims"] = {g.dims[0], g.dims[1]};
    j["values"] = f.values();
    return j;
}

GridFunction grid_function_from_json(const json& j) {
    expect(j.is_object() && j.contains("origin") && j.contains("cell") && j.contains("dims") &&
               j.contains("values"),
           "grid function needs origin, cell, dims, values");
    const auto& o = j.at("origin");
    const auto& c = j.at("cell");
    const auto& d = j.at("dims");
    expect(o.is_array() && o.size() == 2 && c.is_array() && c.size() == 2 && d.is_array() &&
               d.size() == 2,
           "origin, cell, dims must be pairs");
    std::array<double, 2> origin{finite_number(o[0], "origin must be finite"),
                                 finite_number(o[1], "origin must be finite")};
    std::array<double, 2> cell{finite_number(c[0], "cell must be finite"),
                               finite_number(c[1], "cell must be finite")};
    expect(cell[0] > 0.0 && cell[1] > 0.0, "cell sizes must be positive");
    expect(d[0].is_number_integer() && d[1].is_number_integer(), "dims must be integers");
    std::array<index_t, 2> dims{d[0].get<index_t>(), d[1].get<index_t>()};
    expect(dims[0] >= 1 && dims[1] >= 1, "dims must be positive");
    const auto& vals = j.at("values");
    expect(vals.is_array(), "values must be an array");
    expect(static_cast<index_t>(vals.size()) == dims[0] * dims[1],
           "value count must equal nx*ny");
    std::vector<double> v;
    v.reserve(vals.size());
    for (const auto& x : vals) v.push_back(finite_number(x, "values must be finite numbers"));
    return GridFunction(Grid2D{origin, cell, dims}, std::move(v));
}

json rect_to_json(const Rect& r) {
    json j;
    j["cx"] = r.x.center;
    j["cy"] = r.y.center;
    j["hx"] = r.x.halfwidth;
    j["hy"] = r.y.halfwidth;
    return j;
}

Rect rect_from_json(const json& j) {
    expect(j.is_object() && j.contains("cx") && j.contains("cy") && j.contains("hx") &&
               j.contains("hy"),
           "rect needs cx, cy, hx, hy");
    return make_rect(finite_number(j.at("cx"), "rect center must be finite"),
                     finite_number(j.at("cy"), "rect center must be finite"),
                     finite_number(j.at("hx"), "rect halfwidth must be finite"),
                     finite_number(j.at("hy"), "rect halfwidth must be finite"));
}

json decomposition_to_json(const AtomicDecomposition& d) {
    json terms = json::array();
    for (const auto& t : d.terms) {
        json jt;
        jt["coeff"] = t.coeff;
        jt["rect"] = rect_to_json(t.atom.rect);
        jt["func"] = grid_function_to_json(t.atom.func);
        terms.push_back(std::move(jt));
    }
    json j;
    j["terms"] = std::move(terms);
    return j;
}

AtomicDecomposition decomposition_from_json(const json& j) {
    expect(j.is_object() && j.contains("terms") && j.at("terms").is_array(),
           "decomposition needs a terms array");
    AtomicDecomposition d;
    for (const auto& jt : j.at("terms")) {
        expect(jt.is_object() && jt.contains("coeff") && jt.contains("rect") &&
                   jt.contains("func"),
               "term needs coeff, rect, func");
        AtomicDecomposition::Term t;
        t.coeff = finite_number(jt.at("coeff"), "coeff must be finite");
        t.atom.rect = rect_from_json(jt.at("rect"));
        t.atom.func = grid_function_from_json(jt.at("func"));
        d.terms.push_back(std::move(t));
    }
    return d;
}

// Export shape: a flat term list indexed by (k, j) = (iteration, position
// within that iteration), plus the leftover decomposition, the mass history,
// and a diagnostics block. Per-iteration bookkeeping lives under
// diagnostics.levels so the parse can rebuild the grouped form exactly.
json factorization_to_json(const Factorization& f) {
    json terms = json::array();
    for (std::size_t k = 0; k < f.levels.size(); ++k) {
        const auto& lvl = f.levels[k];
        for (std::size_t t = 0; t < lvl.terms.size(); ++t) {
            json jt;
            jt["k"] = k + 1;  // matches the 1-based history subscript
            jt["j"] = t;
            jt["coeff"] = lvl.terms[t].coeff;
            jt["g"] = grid_function_to_json(lvl.terms[t].g);
            jt["h"] = grid_function_to_json(lvl.terms[t].h);
            terms.push_back(std::move(jt));
        }
    }
    json levels = json::array();
    for (const auto& lvl : f.levels) {
        json jl;
        jl["M"] = lvl.M;
        jl["eps"] = lvl.eps;
        jl["mass_in"] = lvl.mass_in;
        jl["n_atoms_in"] = lvl.n_atoms_in;
        jl["residual_abs"] = lvl.residual_abs;
        jl["sum_coeff_c"] = lvl.sum_coeff_c;
        levels.push_back(std::move(jl));
    }
    json diag;
    diag["M"] = f.levels.empty() ? choose_M(f.eps) : f.levels.front().M;
    diag["eps"] = f.eps;
    diag["k_max"] = f.k_max;
    diag["mass_tol"] = f.mass_tol;
    diag["schedule"] = f.schedule == EpsSchedule::Halving ? "halving" : "fixed";
    diag["residual_mass"] = f.residual_mass;
    diag["non_convergence"] = f.non_convergence;
    json consts;
    consts["max_c_eps"] = f.max_c_eps;
    if (std::isfinite(f.input_l2))
        consts["input_l2"] = f.input_l2;
    else
        consts["input_l2"] = nullptr;
    diag["measured_constants"] = std::move(consts);
    diag["levels"] = std::move(levels);

    json j;
    j["terms"] = std::move(terms);
    j["residual"] = decomposition_to_json(f.residual);
    j["history"] = f.history;
    j["diagnostics"] = std::move(diag);
    return j;
}

Factorization factorization_from_json(const json& j) {
    expect(j.is_object() && j.contains("terms") && j.contains("residual") &&
               j.contains("history") && j.contains("diagnostics"),
           "factorization needs terms, residual, history, diagnostics");
    const json& diag = j.at("diagnostics");
    expect(diag.is_object() && diag.contains("levels"), "diagnostics needs a levels array");

    Factorization f;
    f.eps = finite_number(diag.at("eps"), "eps must be finite");
    f.k_max = diag.at("k_max").get<int>();
    f.mass_tol = finite_number(diag.at("mass_tol"), "mass_tol must be finite");
    std::string sched = diag.at("schedule").get<std::string>();
    expect(sched == "fixed" || sched == "halving", "schedule must be fixed or halving");
    f.schedule = sched == "halving" ? EpsSchedule::Halving : EpsSchedule::Fixed;
    for (const auto& x : j.at("history"))
        f.history.push_back(finite_number(x, "history must be finite"));
    f.residual_mass = finite_number(diag.at("residual_mass"), "residual_mass must be finite");
    f.non_convergence = diag.at("non_convergence").get<bool>();
    const json& consts = diag.at("measured_constants");
    f.max_c_eps = finite_number(consts.at("max_c_eps"), "max_c_eps must be finite");
    f.input_l2 = consts.at("input_l2").is_null()
                     ? std::numeric_limits<double>::quiet_NaN()
                     : finite_number(consts.at("input_l2"), "input_l2");
    for (const auto& jl : diag.at("levels")) {
        FactorLevel lvl;
        lvl.M = jl.at("M").get<int>();
        lvl.eps = finite_number(jl.at("eps"), "level eps must be finite");
        lvl.mass_in = finite_number(jl.at("mass_in"), "mass_in must be finite");
        lvl.n_atoms_in = jl.at("n_atoms_in").get<index_t>();
        lvl.residual_abs = finite_number(jl.at("residual_abs"), "residual_abs must be finite");
        lvl.sum_coeff_c = finite_number(jl.at("sum_coeff_c"), "sum_coeff_c must be finite");
        f.levels.push_back(std::move(lvl));
    }
    for (const auto& jt : j.at("terms")) {
        expect(jt.is_object() && jt.contains("k") && jt.contains("coeff") && jt.contains("g") &&
                   jt.contains("h"),
               "term needs k, coeff, g, h");
        expect(jt.at("k").is_number_integer(), "term k must be an integer");
        auto k = jt.at("k").get<std::size_t>();
        expect(k >= 1 && k <= f.levels.size(), "term k out of range of diagnostics.levels");
        FactorTerm t;
        t.level = static_cast<int>(k);
        t.coeff = finite_number(jt.at("coeff"), "coeff must be finite");
        t.g = grid_function_from_json(jt.at("g"));
        t.h = grid_function_from_json(jt.at("h"));
        f.levels[k - 1].terms.push_back(std::move(t));
    }
    f.residual = decomposition_from_json(j.at("residual"));
    return f;
}

} // namespace h1fact
