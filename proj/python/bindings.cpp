// python bindings for the factorization library; thin wrappers, all real
// logic lives in the C++ core
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "h1fact/atoms.hpp"
#include "h1fact/commutator.hpp"
#include "h1fact/errors.hpp"
#include "h1fact/factorization.hpp"
#include "h1fact/families.hpp"
#include "h1fact/grid.hpp"
#include "h1fact/hilbert.hpp"
#include "h1fact/norms.hpp"
#include "h1fact/serialization.hpp"

namespace py = pybind11;
using namespace h1fact;

namespace {

GridFunction make_function(std::array<double, 2> origin, std::array<double, 2> cell,
                           std::array<index_t, 2> dims, std::vector<double> values) {
    return GridFunction(make_grid(origin, cell, dims), std::move(values));
}

RectFamily parse_family(const std::string& mode, index_t count, uint64_t seed) {
    RectFamily fam;
    if (mode == "all")
        fam.mode = RectFamily::Mode::AllAligned;
    else if (mode == "dyadic")
        fam.mode = RectFamily::Mode::Dyadic;
    else if (mode == "sampled")
        fam.mode = RectFamily::Mode::Sampled;
    else
        throw Error("unknown rect family: " + mode);
    fam.count = count;
    fam.seed = seed;
    return fam;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "bilinear Hilbert factorization core";

    py::register_exception<BudgetExceeded>(m, "BudgetExceeded");

    py::class_<Interval>(m, "Interval")
        .def_readonly("center", &Interval::center)
        .def_readonly("halfwidth", &Interval::halfwidth)
        .def("lo", &Interval::lo)
        .def("hi", &Interval::hi);

    py::class_<Rect>(m, "Rect")
        .def(py::init(&make_rect), py::arg("cx"), py::arg("cy"), py::arg("hx"), py::arg("hy"))
        .def_readonly("x", &Rect::x)
        .def_readonly("y", &Rect::y)
        .def("area", &Rect::area)
        .def("__repr__", [](const Rect& r) {
            return "Rect(cx=" + std::to_string(r.x.center) + ", cy=" + std::to_string(r.y.center) +
                   ", hx=" + std::to_string(r.x.halfwidth) + ", hy=" + std::to_string(r.y.halfwidth) + ")";
        });

    py::class_<Grid2D>(m, "Grid2D")
        .def_readonly("origin", &Grid2D::origin)
        .def_readonly("cell", &Grid2D::cell)
        .def_readonly("dims", &Grid2D::dims)
        .def("cell_count", &Grid2D::cell_count);

    py::class_<GridFunction>(m, "GridFunction")
        .def(py::init(&make_function), py::arg("origin"), py::arg("cell"), py::arg("dims"),
             py::arg("values"))
        .def_property_readonly("grid", &GridFunction::grid)
        .def_property_readonly("values",
                               [](const GridFunction& f) { return f.values(); })
        .def("to_json", [](const GridFunction& f) { return grid_function_to_json(f).dump(); })
        .def_static("from_json",
                    [](const std::string& s) { return grid_function_from_json(json::parse(s)); });

    m.def("indicator", &indicator, py::arg("grid"), py::arg("rect"));
    m.def("integral", &integral);
    m.def("l2_norm", &l2_norm);
    m.def("linf_norm", &linf_norm);
    m.def("inner_product", &inner_product);

    m.def("hilbert_phi", &hilbert_phi, py::arg("d"));
    m.def("apply_double_hilbert", &apply_H1H2, py::arg("f"));
    m.def("double_hilbert_at", &eval_H1H2_point, py::arg("f"), py::arg("point"));

    py::class_<ValidationReport>(m, "ValidationReport")
        .def_readonly("pass_", &ValidationReport::pass)
        .def_readonly("support_slack", &ValidationReport::support_slack)
        .def_readonly("bound_slack", &ValidationReport::bound_slack)
        .def_readonly("cancel_slack", &ValidationReport::cancel_slack);

    py::class_<Atom>(m, "Atom")
        .def_readonly("rect", &Atom::rect)
        .def_readonly("func", &Atom::func);

    py::enum_<Axis>(m, "Axis").value("X", Axis::X).value("Y", Axis::Y);

    m.def("make_haar_atom", &make_haar_atom, py::arg("rect"), py::arg("n_subcells"),
          py::arg("axis") = Axis::X);
    m.def("random_atom", &random_atom, py::arg("rect"), py::arg("n_subcells"), py::arg("seed"));
    m.def(
        "validate_atom", [](const Atom& a, double tol) { return validate_atom(a, tol); },
        py::arg("atom"), py::arg("tol") = 1e-9);

    m.def("pi_form", &pi_form, py::arg("g"), py::arg("h"));
    m.def("choose_M", &choose_M, py::arg("eps"));

    py::class_<ApproxResult>(m, "ApproxResult")
        .def_readonly("M", &ApproxResult::M)
        .def_readonly("eps", &ApproxResult::eps)
        .def_readonly("rect", &ApproxResult::rect)
        .def_readonly("shifted_rect", &ApproxResult::shifted_rect)
        .def_readonly("f", &ApproxResult::f)
        .def_readonly("g", &ApproxResult::g)
        .def_readonly("error", &ApproxResult::error)
        .def_readonly("point_value", &ApproxResult::point_value)
        .def_readonly("c_eps", &ApproxResult::c_eps);

    m.def("approximate_atom", &approximate_atom, py::arg("atom"), py::arg("eps"));
    m.def("approximate_atom_with_M", &approximate_atom_with_M, py::arg("atom"), py::arg("M"),
          py::arg("eps"));

    py::class_<AtomicDecomposition>(m, "AtomicDecomposition")
        .def_property_readonly("n_terms",
                               [](const AtomicDecomposition& d) { return d.terms.size(); })
        .def("coeffs",
             [](const AtomicDecomposition& d) {
                 std::vector<double> c;
                 c.reserve(d.terms.size());
                 for (const auto& t : d.terms) c.push_back(t.coeff);
                 return c;
             })
        .def_static(
            "single",
            [](const Atom& a, double coeff) {
                AtomicDecomposition d;
                d.terms.push_back({coeff, a});
                return d;
            },
            py::arg("atom"), py::arg("coeff") = 1.0)
        .def("to_json", [](const AtomicDecomposition& d) { return decomposition_to_json(d).dump(); })
        .def_static("from_json",
                    [](const std::string& s) { return decomposition_from_json(json::parse(s)); });

    m.def("reconstruct_decomposition", &reconstruct_decomposition);
    m.def("h1_upper_bound", &h1_upper_bound);

    py::class_<FactorLevel>(m, "FactorLevel")
        .def_readonly("M", &FactorLevel::M)
        .def_readonly("eps", &FactorLevel::eps)
        .def_readonly("mass_in", &FactorLevel::mass_in)
        .def_readonly("n_atoms_in", &FactorLevel::n_atoms_in)
        .def_property_readonly("n_terms",
                               [](const FactorLevel& l) { return l.terms.size(); });

    py::class_<Factorization>(m, "Factorization")
        .def_readonly("levels", &Factorization::levels)
        .def_readonly("history", &Factorization::history)
        .def_readonly("residual_mass", &Factorization::residual_mass)
        .def_readonly("non_convergence", &Factorization::non_convergence)
        .def_readonly("max_c_eps", &Factorization::max_c_eps)
        .def("to_json", [](const Factorization& f) { return factorization_to_json(f).dump(); })
        .def_static("from_json",
                    [](const std::string& s) { return factorization_from_json(json::parse(s)); });

    m.def(
        "weak_factorize",
        [](const AtomicDecomposition& input, double eps, int k_max, double mass_tol,
           const std::string& schedule) {
            EpsSchedule s = EpsSchedule::Fixed;
            if (schedule == "halving")
                s = EpsSchedule::Halving;
            else if (schedule != "fixed")
                throw Error("unknown schedule: " + schedule);
            return weak_factorize(input, eps, k_max, mass_tol, s);
        },
        py::arg("input"), py::arg("eps"), py::arg("k_max"), py::arg("mass_tol") = 0.0,
        py::arg("schedule") = "fixed");
    m.def("reconstruct_factorization", &reconstruct_factorization);

    m.def(
        "bmo_norm",
        [](const GridFunction& b, const std::string& mode, index_t count, uint64_t seed) {
            return bmo_norm(b, parse_family(mode, count, seed));
        },
        py::arg("b"), py::arg("mode") = "all", py::arg("count") = 2000, py::arg("seed") = 42);
    m.def("bmo_slicewise", &bmo_slicewise, py::arg("b"));

    m.def("commutator_apply", &commutator_apply, py::arg("b"), py::arg("f"));
    m.def(
        "commutator_norm",
        [](const GridFunction& b, int max_iters, double tol, uint64_t seed) {
            auto est = operator_norm(b, max_iters, tol, seed);
            return py::make_tuple(est.value, est.converged, est.iterations);
        },
        py::arg("b"), py::arg("max_iters") = 2000, py::arg("tol") = 1e-9, py::arg("seed") = 42);

    m.def("symbol_family", &symbol_family, py::arg("version"), py::arg("n"));
    m.def("set_cell_budget", &set_cell_budget, py::arg("budget"));
    m.def("cell_budget", &cell_budget);
}
