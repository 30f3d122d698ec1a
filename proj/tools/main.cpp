#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "h1fact/commutator.hpp"
#include "h1fact/factorization.hpp"
#include "h1fact/families.hpp"
#include "h1fact/norms.hpp"
#include "h1fact/serialization.hpp"

namespace {

using namespace h1fact;

struct RunConfig {
    double epsilon = 0.3;
    int k_max = 3;
    index_t grid_n = 8;
    std::uint64_t seed = 42;
    double mass_tol = 0.0;
    std::string family = "haar";
    std::string schedule = "fixed";
    std::string rect_family = "all";
    index_t samples = 2000;
    int max_iters = 2000;
    double tol = 1e-9;
    std::string symbols = "v1";
    std::string input_path;
    std::string out_path;
    std::string format = "csv";
    bool plot_data = false;
};

std::string fmt(double v) {
    char buf[40];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

std::string fmt(index_t v) { return std::to_string(v); }
std::string fmt(int v) { return std::to_string(v); }

RectFamily parse_rect_family(const RunConfig& cfg) {
    RectFamily fam;
    if (cfg.rect_family == "all") {
        fam.mode = RectFamily::Mode::AllAligned;
    } else if (cfg.rect_family == "dyadic") {
        fam.mode = RectFamily::Mode::Dyadic;
    } else if (cfg.rect_family == "sampled") {
        fam.mode = RectFamily::Mode::Sampled;
        fam.count = cfg.samples;
        fam.seed = cfg.seed;
    } else {
        throw PreconditionViolated("unknown rectangle family: " + cfg.rect_family);
    }
    return fam;
}

// a cheap identity gate: if the discrete structure is off, abort loudly
// instead of producing plausible numbers
void self_check() {
    Rect r = make_rect(0.5, 0.5, 0.5, 0.5);
    Atom a = make_haar_atom(r, 4, Axis::X);
    if (linf_norm(pi_form(a.func, a.func)) != 0.0)
        throw Error("self-check failed: form of a function with itself is not zero");
    Atom a2 = random_atom(r, 4, 7);
    auto syms = symbol_family("v1", 4);
    DualityCheck d = duality_check(syms[3].second, a.func, a2.func);
    double scale = std::max({1.0, std::abs(d.lhs), std::abs(d.rhs)});
    if (d.abs_gap > 1e-10 * scale)
        throw Error("self-check failed: pairing identity gap " + fmt(d.abs_gap));
}

void write_output(const RunConfig& cfg, const std::string& text, const std::string& plot) {
    if (cfg.out_path.empty()) {
        std::cout << text;
        if (!plot.empty())
            std::cerr << "note: --plot-data needs --out, plot script not written\n";
        return;
    }
    auto write_file = [](const std::string& path, const std::string& body) {
        std::string tmp = path + ".tmp";
        std::ofstream os(tmp, std::ios::binary);
        if (!os) throw Error("cannot open " + tmp + " for writing");
        os << body;
        os.close();
        if (!os) throw Error("failed writing " + tmp);
        std::filesystem::rename(tmp, path);
    };
    write_file(cfg.out_path, text);
    if (!plot.empty()) write_file(cfg.out_path + ".gp", plot);
}

std::string plot_script(const RunConfig& cfg, const std::string& ylabel, int xcol, int ycol,
                        bool logy) {
    std::ostringstream os;
    os << "set datafile separator ','\n";
    os << "set key autotitle columnhead\n";
    os << "set ylabel '" << ylabel << "'\n";
    if (logy) os << "set logscale y\n";
    os << "plot '" << cfg.out_path << "' using " << xcol << ":" << ycol
       << " with linespoints\n";
    return os.str();
}

Rect unit_rect() { return make_rect(0.5, 0.5, 0.5, 0.5); }

int run_approx_atom(const RunConfig& cfg, bool epsilon_given) {
    self_check();
    std::vector<int> Ms;
    if (epsilon_given)
        Ms.push_back(choose_M(cfg.epsilon));
    else
        Ms = {8, 16, 32};
    Atom atom = atom_from_family(cfg.family, unit_rect(), cfg.grid_n, cfg.seed);

    json rows = json::array();
    std::ostringstream csv;
    csv << "M,point_value,err_l2_scaled,c_eps_scaled,mass_scaled\n";
    for (int M : Ms) {
        ApproxResult res = approximate_atom_with_M(atom, M, cfg.epsilon);
        auto [dec, tr] = decompose_error(res.error, res.rect, res.shifted_rect, M);
        double err_scaled = static_cast<double>(M) * std::sqrt(res.rect.area()) *
                            l2_norm(res.error);
        double c_scaled = res.c_eps / (static_cast<double>(M) * M);
        json row;
        row["M"] = M;
        row["point_value"] = res.point_value;
        row["err_l2_scaled"] = err_scaled;
        row["c_eps_scaled"] = c_scaled;
        row["mass_scaled"] = tr.c_measured;
        rows.push_back(row);
        csv << M << ',' << fmt(res.point_value) << ',' << fmt(err_scaled) << ','
            << fmt(c_scaled) << ',' << fmt(tr.c_measured) << '\n';
    }
    std::string text = cfg.format == "json" ? rows.dump(2) + "\n" : csv.str();
    std::string plot;
    if (cfg.plot_data && !cfg.out_path.empty() && cfg.format == "csv")
        plot = plot_script(cfg, "scaled error", 1, 3, true);
    write_output(cfg, text, plot);
    return 0;
}

int run_factorize(const RunConfig& cfg) {
    self_check();
    AtomicDecomposition input;
    if (!cfg.input_path.empty()) {
        std::ifstream is(cfg.input_path, std::ios::binary);
        if (!is) throw Error("cannot read " + cfg.input_path);
        json j = json::parse(is);
        input = decomposition_from_json(j);
    } else {
        input.terms.push_back({1.0, atom_from_family(cfg.family, unit_rect(), cfg.grid_n,
                                                     cfg.seed)});
    }
    EpsSchedule sched = cfg.schedule == "halving" ? EpsSchedule::Halving : EpsSchedule::Fixed;
    Factorization F = weak_factorize(input, cfg.epsilon, cfg.k_max, cfg.mass_tol, sched);

    std::string text;
    if (cfg.format == "json") {
        text = factorization_to_json(F).dump(2) + "\n";
    } else {
        std::ostringstream csv;
        csv << "k,m_k,n_atoms,recon_err_rel,sum_alpha_g2h2\n";
        double cumulative = 0.0;
        for (std::size_t k = 0; k < F.levels.size(); ++k) {
            const FactorLevel& lvl = F.levels[k];
            cumulative += lvl.residual_abs;
            double rel = F.input_l2 > 0.0 ? cumulative / F.input_l2
                                          : std::numeric_limits<double>::quiet_NaN();
            csv << (k + 1) << ',' << fmt(F.history[k]) << ',' << lvl.n_atoms_in << ','
                << fmt(rel) << ',' << fmt(lvl.sum_coeff_c) << '\n';
        }
        csv << "# residual_mass=" << fmt(F.residual_mass) << '\n';
        csv << "# non_convergence=" << (F.non_convergence ? "true" : "false") << '\n';
        csv << "# max_c_eps=" << fmt(F.max_c_eps) << '\n';
        if (!F.levels.empty()) csv << "# M=" << F.levels.front().M << '\n';
        text = csv.str();
    }
    std::string plot;
    if (cfg.plot_data && !cfg.out_path.empty() && cfg.format == "csv")
        plot = plot_script(cfg, "level mass", 1, 2, true);
    write_output(cfg, text, plot);
    return 0;
}

int run_commutator(const RunConfig& cfg) {
    self_check();
    auto syms = symbol_family(cfg.symbols, cfg.grid_n);
    RectFamily fam = parse_rect_family(cfg);
    TwoSidedReport rep = two_sided_experiment(syms, fam, cfg.max_iters, cfg.tol, cfg.seed);

    std::string text;
    if (cfg.format == "json") {
        json rows = json::array();
        for (const auto& r : rep.rows) {
            json row;
            row["b_id"] = r.id;
            row["n"] = cfg.grid_n;
            row["constant"] = r.constant;
            row["bmo"] = r.bmo;
            row["op_norm"] = r.op_norm;
            row["ratio"] = r.ratio;
            row["iters"] = r.iterations;
            row["residual"] = r.residual;
            rows.push_back(row);
        }
        json j;
        j["rows"] = rows;
        j["min_ratio"] = rep.min_ratio;
        j["max_ratio"] = rep.max_ratio;
        text = j.dump(2) + "\n";
    } else {
        std::ostringstream csv;
        csv << "b_id,n,bmo,op_norm,ratio,iters,residual\n";
        for (const auto& r : rep.rows) {
            if (r.constant) {
                csv << "# " << r.id << ": constant symbol, commutator vanishes\n";
                continue;
            }
            csv << r.id << ',' << cfg.grid_n << ',' << fmt(r.bmo) << ',' << fmt(r.op_norm)
                << ',' << fmt(r.ratio) << ',' << r.iterations << ',' << fmt(r.residual)
                << '\n';
        }
        csv << "# ratio_spread=" << fmt(rep.min_ratio > 0.0 ? rep.max_ratio / rep.min_ratio
                                                            : 0.0)
            << '\n';
        text = csv.str();
    }
    std::string plot;
    if (cfg.plot_data && !cfg.out_path.empty() && cfg.format == "csv")
        plot = plot_script(cfg, "two-sided ratio", 3, 5, false);
    write_output(cfg, text, plot);
    return 0;
}

int run_bmo(const RunConfig& cfg) {
    self_check();
    auto syms = symbol_family(cfg.symbols, cfg.grid_n);
    RectFamily fam = parse_rect_family(cfg);
    BmoComparisonReport rep = bmo_equivalence_report(syms, fam);

    std::string text;
    if (cfg.format == "json") {
        json rows = json::array();
        for (const auto& r : rep.rows) {
            json row;
            row["function_id"] = r.id;
            row["family"] = cfg.rect_family;
            row["constant"] = r.constant;
            row["bmo"] = r.bmo;
            row["slicewise"] = r.slicewise;
            row["ratio"] = r.ratio;
            rows.push_back(row);
        }
        json j;
        j["rows"] = rows;
        j["min_ratio"] = rep.min_ratio;
        j["max_ratio"] = rep.max_ratio;
        text = j.dump(2) + "\n";
    } else {
        std::ostringstream csv;
        csv << "function_id,family,bmo,slicewise,ratio\n";
        for (const auto& r : rep.rows)
            csv << r.id << ',' << cfg.rect_family << ',' << fmt(r.bmo) << ','
                << fmt(r.slicewise) << ',' << fmt(r.ratio) << '\n';
        csv << "# ratio_spread=" << fmt(rep.min_ratio > 0.0 ? rep.max_ratio / rep.min_ratio
                                                            : 0.0)
            << '\n';
        text = csv.str();
    }
    std::string plot;
    if (cfg.plot_data && !cfg.out_path.empty() && cfg.format == "csv")
        plot = plot_script(cfg, "norm ratio", 3, 5, false);
    write_output(cfg, text, plot);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"weak factorization toolkit: bilinear approximations of rectangle atoms,\n"
                 "iterated-transform commutators, and rectangle oscillation norms"};
    app.require_subcommand(1);
    // let global options (--out, --format, ...) appear after the subcommand
    app.fallthrough();

    RunConfig cfg;
    index_t max_cells = cell_budget();
    app.add_option("--out", cfg.out_path, "write output to this file instead of stdout");
    app.add_option("--format", cfg.format, "output format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    app.add_option("--max-cells", max_cells, "cap on cells materialized per grid operation")
        ->capture_default_str();
    app.add_option("--seed", cfg.seed, "RNG seed")->capture_default_str();
    app.add_flag("--plot-data", cfg.plot_data,
                 "with --out and csv format, also write a gnuplot script next to the output");

    CLI::App* approx = app.add_subcommand(
        "approx-atom", "approximate one atom by a single bilinear form term; by default "
                       "sweeps M over {8,16,32}, with --epsilon runs the derived M only");
    approx->add_option("--epsilon", cfg.epsilon, "accuracy parameter; sets M")
        ->check(CLI::PositiveNumber);
    approx->add_option("--family", cfg.family, "atom family: haar, haar_y, random")
        ->capture_default_str();
    approx->add_option("--grid-n", cfg.grid_n, "atom subcells per axis")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    CLI::App* fact = app.add_subcommand(
        "factorize", "run the level-by-level factorization of an atomic decomposition; "
                     "per level: mass, atom count, cumulative reconstruction bound");
    fact->add_option("--epsilon", cfg.epsilon, "accuracy parameter per level")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    fact->add_option("--k-max", cfg.k_max, "maximum number of levels")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    fact->add_option("--mass-tol", cfg.mass_tol, "stop when the level mass drops below this")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    fact->add_option("--eps-schedule", cfg.schedule, "epsilon per level: fixed or halving")
        ->check(CLI::IsMember({"fixed", "halving"}))
        ->capture_default_str();
    fact->add_option("--family", cfg.family, "atom family for the generated input")
        ->capture_default_str();
    fact->add_option("--grid-n", cfg.grid_n, "atom subcells per axis")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    fact->add_option("--input", cfg.input_path,
                     "read the input decomposition from this JSON file instead");

    CLI::App* comm = app.add_subcommand(
        "commutator", "estimate commutator operator norms against oscillation norms over "
                      "the symbol family; constant symbols are noted and skipped");
    comm->add_option("--symbols", cfg.symbols, "symbol family version")->capture_default_str();
    comm->add_option("--grid-n", cfg.grid_n, "symbol grid cells per axis (at most 64)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    comm->add_option("--rect-family", cfg.rect_family, "rectangle family: all, dyadic, sampled")
        ->check(CLI::IsMember({"all", "dyadic", "sampled"}))
        ->capture_default_str();
    comm->add_option("--samples", cfg.samples, "draw count for the sampled family")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    comm->add_option("--max-iters", cfg.max_iters, "power iteration cap")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    comm->add_option("--tol", cfg.tol, "relative convergence tolerance")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    CLI::App* bmo = app.add_subcommand(
        "bmo", "rectangle oscillation norms of the symbol family, full scan against the "
               "cheaper slicewise estimate");
    bmo->add_option("--symbols", cfg.symbols, "symbol family version")->capture_default_str();
    bmo->add_option("--grid-n", cfg.grid_n, "symbol grid cells per axis")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    bmo->add_option("--rect-family", cfg.rect_family, "rectangle family: all, dyadic, sampled")
        ->check(CLI::IsMember({"all", "dyadic", "sampled"}))
        ->capture_default_str();
    bmo->add_option("--samples", cfg.samples, "draw count for the sampled family")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        set_cell_budget(max_cells);
        if (approx->parsed()) return run_approx_atom(cfg, approx->count("--epsilon") > 0);
        if (fact->parsed()) return run_factorize(cfg);
        if (comm->parsed()) return run_commutator(cfg);
        if (bmo->parsed()) return run_bmo(cfg);
        return 2;
    } catch (const BudgetExceeded& e) {
        std::cerr << "resource limit: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
}
