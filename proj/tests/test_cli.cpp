#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "zeno/cli.hpp"

namespace fs = std::filesystem;

namespace {

struct CoutCapture {
    std::stringstream buffer;
    std::streambuf* saved;
    CoutCapture() : saved(std::cout.rdbuf(buffer.rdbuf())) {}
    ~CoutCapture() { std::cout.rdbuf(saved); }
    std::string text() const { return buffer.str(); }
};

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

fs::path temp_file(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "zeno_lab_cli_tests";
    fs::create_directories(dir);
    return dir / name;
}

// survival column values from a simulate CSV
std::vector<std::pair<double, double>> parse_two_columns(const std::string& text) {
    std::vector<std::pair<double, double>> rows;
    std::stringstream stream(text);
    std::string line;
    while (std::getline(stream, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto comma = line.find(',');
        rows.emplace_back(std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1)));
    }
    return rows;
}

}  // namespace

TEST_CASE("models subcommand lists the catalogue") {
    CoutCapture capture;
    CHECK(zeno::cli::run({"models"}) == 0);
    const std::string text = capture.text();
    for (const char* name : {"rabi2", "nonherm", "flat_continuum", "peres3", "fourlevel",
                             "twoqubit", "twoqubit_peres", "twoqubit_peres_fixed", "cavity",
                             "decay"})
        CHECK(text.find(name) != std::string::npos);
}

TEST_CASE("simulate writes a deterministic CSV matching the closed form") {
    const fs::path out = temp_file("sp3.csv");
    const std::vector<std::string> args = {"simulate", "--model", "peres3",  "--param",
                                           "omega=1",  "--param", "k=9",     "--t-max",
                                           "3.14",     "--dt",    "0.01",    "--out",
                                           out.string()};
    REQUIRE(zeno::cli::run(args) == 0);
    const std::string first = slurp(out);
    REQUIRE(zeno::cli::run(args) == 0);
    CHECK(first == slurp(out));  // byte-identical on rerun

    CHECK(first.rfind("# zeno-lab simulate", 0) == 0);
    CHECK(first.find("# columns: t,survival") != std::string::npos);
    CHECK(first.find("# model = peres3") != std::string::npos);
    CHECK(first.find('\r') == std::string::npos);

    const auto rows = parse_two_columns(first);
    REQUIRE(rows.size() == 315);
    for (const auto& [t, p] : rows) {
        const double w2 = 81.0 + 1.0;
        const double num = 81.0 + std::cos(std::sqrt(w2) * t);
        CHECK(std::abs(p - num * num / (w2 * w2)) < 1e-8);
    }
}

TEST_CASE("usage errors exit with code 2") {
    CHECK(zeno::cli::run({"simulate", "--no-such-flag"}) == 2);
    CHECK(zeno::cli::run({"not-a-subcommand"}) == 2);
    const fs::path out = temp_file("unused.csv");
    CHECK(zeno::cli::run({"simulate", "--model", "martian", "--param", "omega=1", "--out",
                          out.string()}) == 2);
    CHECK(zeno::cli::run({"simulate", "--model", "peres3", "--param", "omega=1", "--param",
                          "k=1"}) == 2);  // missing --out
    CHECK(zeno::cli::run({"simulate", "--model", "peres3", "--param", "omega=oops", "--out",
                          out.string()}) == 2);
}

TEST_CASE("numerical failures exit with code 1") {
    // zeno-limit needs a Hermitian measurement Hamiltonian; nonherm is not
    const fs::path out = temp_file("fail.csv");
    CHECK(zeno::cli::run({"zeno-limit", "--model", "nonherm", "--param", "omega=1", "--param",
                          "k=1", "--t-max", "1", "--dt", "0.1", "--out", out.string()}) == 1);
}

TEST_CASE("config file merges under explicit flags") {
    const fs::path config = temp_file("run.conf");
    {
        std::ofstream conf(config);
        conf << "# three-level chain\n"
             << "model = peres3\n"
             << "omega = 1\n"
             << "k = 9\n"
             << "t-max = 1.0\n"
             << "dt = 0.5\n";
    }
    const fs::path out = temp_file("config_run.csv");
    REQUIRE(zeno::cli::run({"simulate", "--config", config.string(), "--out", out.string(),
                            "--dt", "0.25"}) == 0);
    const auto rows = parse_two_columns(slurp(out));
    CHECK(rows.size() == 5);  // dt 0.25 from the flag wins over 0.5
    CHECK(slurp(out).find("# k = 9") != std::string::npos);
}

TEST_CASE("json-lines output mirrors the CSV fields") {
    const fs::path out = temp_file("traj.jsonl");
    REQUIRE(zeno::cli::run({"simulate", "--model", "rabi2", "--param", "omega=1", "--t-max",
                            "0.2", "--dt", "0.1", "--format", "json-lines", "--out",
                            out.string()}) == 0);
    const std::string text = slurp(out);
    CHECK(text.find("{\"meta\":{\"subcommand\":\"simulate\"") == 0);
    CHECK(text.find("\"t\":0,\"survival\":1") != std::string::npos);
    CHECK(text.find("\"t\":0.2") != std::string::npos);
}

TEST_CASE("sweep-k output is deterministic under parallelism") {
    const fs::path out = temp_file("sweep.csv");
    const std::vector<std::string> args = {
        "sweep-k", "--model", "peres3", "--param", "omega=1", "--param",   "k=0",
        "--k-values", "1,3,9", "--t-max", "1",     "--dt",    "0.05",      "--jobs",
        "3",       "--out",   out.string()};
    REQUIRE(zeno::cli::run(args) == 0);
    const std::string parallel = slurp(out);
    CHECK(parallel.find("survival_k1,survival_k3,survival_k9") != std::string::npos);

    std::vector<std::string> serial_args = args;
    serial_args[14] = "1";  // --jobs 1
    REQUIRE(zeno::cli::run(serial_args) == 0);
    CHECK(parallel == slurp(out));
}

TEST_CASE("dfs report prints the 5-dimensional subspace") {
    CoutCapture capture;
    CHECK(zeno::cli::run({"dfs", "--model", "cavity", "--param", "g=1", "--param", "kappa=1",
                          "--param", "nmax=2"}) == 0);
    const std::string text = capture.text();
    CHECK(text.find("dimension: 5") != std::string::npos);
    CHECK(text.find("sector N=0: kernel dimension 4") != std::string::npos);
    CHECK(text.find("sector N=1: kernel dimension 1") != std::string::npos);
    CHECK(text.find("|021>") != std::string::npos);
}

TEST_CASE("pulsed subcommand tabulates survival and gamma_eff") {
    const fs::path out = temp_file("pulsed.csv");
    REQUIRE(zeno::cli::run({"pulsed", "--model", "rabi2", "--param", "omega=1", "--n-values",
                            "4,16", "--t-total", "1.5707963267948966", "--out",
                            out.string()}) == 0);
    const std::string text = slurp(out);
    CHECK(text.find("# columns: n,tau,survival,gamma_eff") != std::string::npos);
    std::stringstream stream(text);
    std::string line;
    std::vector<double> survivals;
    while (std::getline(stream, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::stringstream row(line);
        std::string cell;
        std::vector<double> cells;
        while (std::getline(row, cell, ',')) cells.push_back(std::stod(cell));
        survivals.push_back(cells[2]);
    }
    REQUIRE(survivals.size() == 2);
    CHECK(survivals[0] == doctest::Approx(0.5307900429).epsilon(1e-9));
    CHECK(survivals[1] > survivals[0]);
}

TEST_CASE("pulsed sector projector lumps the initial state's sector") {
    const fs::path out = temp_file("pulsed_sector.csv");
    REQUIRE(zeno::cli::run({"pulsed", "--model", "fourlevel", "--param", "omega=1", "--param",
                            "k=3", "--param", "kprime=0.5", "--projector", "sector",
                            "--n-values", "8", "--t-total", "1", "--out", out.string()}) == 0);
    const std::string text = slurp(out);
    std::stringstream stream(text);
    std::string line;
    while (std::getline(stream, line))
        if (!line.empty() && line[0] != '#') {
            const auto last_comma = line.rfind(',');
            const auto second_last = line.rfind(',', last_comma - 1);
            const double survival =
                std::stod(line.substr(second_last + 1, last_comma - second_last - 1));
            CHECK(survival > 0.0);
            CHECK(survival <= 1.0 + 1e-12);
        }
}

TEST_CASE("zeno-limit defect table decreases") {
    const fs::path out = temp_file("defect.csv");
    REQUIRE(zeno::cli::run({"zeno-limit", "--model", "peres3", "--param", "omega=1", "--param",
                            "k=1", "--k-values", "25,100", "--t-max", "1", "--out",
                            out.string()}) == 0);
    const std::string text = slurp(out);
    CHECK(text.find("# columns: k,limit_distance,intertwining_defect") != std::string::npos);
    const auto rows = [&] {
        std::vector<std::vector<double>> all;
        std::stringstream stream(text);
        std::string line;
        while (std::getline(stream, line)) {
            if (line.empty() || line[0] == '#') continue;
            std::stringstream row(line);
            std::string cell;
            std::vector<double> cells;
            while (std::getline(row, cell, ',')) cells.push_back(std::stod(cell));
            all.push_back(cells);
        }
        return all;
    }();
    REQUIRE(rows.size() == 2);
    CHECK(rows[1][1] < rows[0][1]);
}

TEST_CASE("classify prints a QZE verdict for the watched chain") {
    CoutCapture capture;
    CHECK(zeno::cli::run({"classify", "--model", "peres3", "--param", "omega=1", "--param",
                          "k=9", "--t-max", "3.14", "--dt", "0.005"}) == 0);
    const std::string text = capture.text();
    CHECK(text.find("verdict: QZE") != std::string::npos);
    CHECK(text.find("poincare time:") != std::string::npos);
}

TEST_CASE("perturb reports the expansion and its validation error") {
    CoutCapture capture;
    CHECK(zeno::cli::run({"perturb", "--model", "peres3", "--param", "omega=1", "--param",
                          "k=1", "--lambda", "0.01", "--order", "2"}) == 0);
    const std::string text = capture.text();
    CHECK(text.find("max |predicted - exact|") != std::string::npos);
    // the reported residual must be at the lambda^3 scale
    const auto pos = text.find("max |predicted - exact|: ");
    const double residual = std::stod(text.substr(pos + 25));
    CHECK(residual < 1e-5);
}

TEST_CASE("emit-plot-script writes a gnuplot file") {
    const fs::path out = temp_file("plot_me.csv");
    REQUIRE(zeno::cli::run({"simulate", "--model", "rabi2", "--param", "omega=1", "--t-max",
                            "1", "--dt", "0.5", "--out", out.string(),
                            "--emit-plot-script"}) == 0);
    const std::string script = slurp(out.string() + ".gp");
    CHECK(script.find("plot") != std::string::npos);
    CHECK(script.find(out.string()) != std::string::npos);
}
