#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "h1fact/atoms.hpp"
#include "h1fact/grid.hpp"
#include "h1fact/serialization.hpp"

namespace fs = std::filesystem;

namespace {

const std::string cli = H1FACT_CLI_PATH;

fs::path work_dir() {
    static fs::path dir = [] {
        auto d = fs::temp_directory_path() / "h1fact_cli_tests";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

int run(const std::string& args, const fs::path& stdout_to = {}) {
    std::string cmd = cli + " " + args;
    if (!stdout_to.empty()) cmd += " > " + stdout_to.string() + " 2>&1";
    else cmd += " > /dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int count_lines(const std::string& s) {
    int n = 0;
    for (char c : s)
        if (c == '\n') ++n;
    return n;
}

}  // namespace

TEST_CASE("help and argument validation exit codes") {
    CHECK(run("--help") == 0);
    CHECK(run("approx-atom --help") == 0);
    CHECK(run("--no-such-flag") == 2);
    CHECK(run("no-such-command") == 2);
    CHECK(run("factorize --epsilon -1") == 2);
    CHECK(run("factorize --epsilon 0") == 2);
    CHECK(run("factorize --k-max -2") == 2);
}

TEST_CASE("budget violations use their own exit code") {
    CHECK(run("bmo --grid-n 64 --rect-family all") == 3);
}

TEST_CASE("atom approximation sweep output") {
    auto out = work_dir() / "approx.csv";
    REQUIRE(run("approx-atom --out " + out.string()) == 0);
    auto text = slurp(out);
    CHECK(text.rfind("M,point_value,err_l2_scaled,c_eps_scaled,mass_scaled", 0) == 0);
    CHECK(count_lines(text) == 4);  // header + M in {8,16,32}

    // byte-identical across runs
    auto out2 = work_dir() / "approx2.csv";
    REQUIRE(run("approx-atom --out " + out2.string()) == 0);
    CHECK(slurp(out2) == text);

    // a fixed accuracy pins a single scale
    auto single = work_dir() / "approx_eps.csv";
    REQUIRE(run("approx-atom --epsilon 0.3 --out " + single.string()) == 0);
    auto stext = slurp(single);
    CHECK(count_lines(stext) == 2);
    CHECK(stext.find("\n6,") != std::string::npos);
}

TEST_CASE("factorization json output parses and carries the run") {
    auto out = work_dir() / "fact.json";
    REQUIRE(run("factorize --epsilon 0.5 --k-max 1 --format json --out " + out.string()) == 0);
    auto j = nlohmann::json::parse(slurp(out));
    CHECK(j["diagnostics"]["eps"] == 0.5);
    CHECK(j["history"].size() == 1);
    CHECK(j["diagnostics"]["M"] == 2);
    CHECK(j["terms"].size() == 1);
    CHECK(j["terms"][0]["k"] == 1);
    CHECK(j["terms"][0]["j"] == 0);
    CHECK(j.contains("residual"));

    // the exported factorization can be fed back through the library
    auto F = h1fact::factorization_from_json(j);
    CHECK(F.k_max == 1);
}

TEST_CASE("factorization csv output") {
    auto out = work_dir() / "fact.csv";
    REQUIRE(run("factorize --epsilon 0.5 --k-max 2 --out " + out.string()) == 0);
    auto text = slurp(out);
    CHECK(text.rfind("k,m_k,n_atoms,recon_err_rel,sum_alpha_g2h2", 0) == 0);
    CHECK(text.find("# residual_mass=") != std::string::npos);
    CHECK(text.find("# non_convergence=true") != std::string::npos);
    CHECK(text.find("# M=2") != std::string::npos);
}

TEST_CASE("factorization accepts an input decomposition file") {
    using namespace h1fact;
    AtomicDecomposition d;
    d.terms.push_back({0.5, make_haar_atom(make_rect(0.5, 0.5, 0.5, 0.5), 4, Axis::X)});
    d.terms.push_back({0.25, make_haar_atom(make_rect(0.25, 0.25, 0.25, 0.25), 2, Axis::Y)});
    auto in = work_dir() / "dec.json";
    {
        std::ofstream f(in);
        f << decomposition_to_json(d).dump();
    }
    auto out = work_dir() / "fact_in.csv";
    REQUIRE(run("factorize --epsilon 0.5 --k-max 1 --input " + in.string() + " --out " +
                out.string()) == 0);
    auto text = slurp(out);
    // mass of the input decomposition shows up as m_1
    CHECK(text.find("1,0.75,2,") != std::string::npos);

    // malformed input is an application error, not a crash
    auto bad = work_dir() / "bad.json";
    {
        std::ofstream f(bad);
        f << "{\"terms\": 3}";
    }
    CHECK(run("factorize --input " + bad.string()) == 4);
    CHECK(run("factorize --input " + (work_dir() / "missing.json").string()) == 4);
}

TEST_CASE("bmo table output") {
    auto out = work_dir() / "bmo.csv";
    REQUIRE(run("bmo --out " + out.string()) == 0);
    auto text = slurp(out);
    CHECK(text.rfind("function_id,family,bmo,slicewise,ratio", 0) == 0);
    CHECK(text.find("const_one,") != std::string::npos);
    CHECK(text.find("checkerboard,") != std::string::npos);
    CHECK(text.find("nan") != std::string::npos);  // constant symbol has no ratio
    CHECK(text.find("# ratio_spread=") != std::string::npos);
    CHECK(count_lines(text) >= 7);
}

TEST_CASE("commutator table output") {
    auto out = work_dir() / "comm.csv";
    REQUIRE(run("commutator --grid-n 6 --max-iters 400 --out " + out.string()) == 0);
    auto text = slurp(out);
    CHECK(text.rfind("b_id,n,bmo,op_norm,ratio,iters,residual", 0) == 0);
    CHECK(text.find("# const_one: constant symbol, commutator vanishes") != std::string::npos);
    CHECK(text.find("# ratio_spread=") != std::string::npos);
}

TEST_CASE("plot companion script") {
    auto out = work_dir() / "plot.csv";
    REQUIRE(run("approx-atom --plot-data --out " + out.string()) == 0);
    CHECK(fs::exists(work_dir() / "plot.csv.gp"));
    auto gp = slurp(work_dir() / "plot.csv.gp");
    CHECK(gp.find("plot.csv") != std::string::npos);
}

TEST_CASE("stdout is the default sink") {
    auto cap = work_dir() / "stdout.txt";
    REQUIRE(run("approx-atom --epsilon 0.5", cap) == 0);
    CHECK(slurp(cap).rfind("M,", 0) == 0);
}
