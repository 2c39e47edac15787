// End-to-end tests of the oamsim binary: exit codes, file formats, manifests,
// seed handling. The binary path arrives as argv[1].

#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string g_cli;

int run(const std::string& args, bool quiet = true) {
    const std::string cmd = g_cli + " " + args + (quiet ? " 2>/dev/null" : "");
    const int rc = std::system(cmd.c_str());
    if (rc == -1) return -1;
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

const char* kConfig = R"({
  "mode_min": -1, "mode_max": 1,
  "source_lorentzian": {"y0": 0.0, "xc": 0.0, "w": 1e9, "A": 1.0},
  "storage_lorentzian": {"y0": 0.132, "xc": 0.0, "w": 2.274, "A": 0.354},
  "epsilon": 0.0, "floor_rate": 0.0,
  "pair_rate": 200000.0, "acquisition_seconds": 1.0, "seed": 42
})";

const char* kWideConfig = R"({
  "mode_min": -7, "mode_max": 7,
  "source_lorentzian": {"y0": 0.0, "xc": 0.0, "w": 7.7, "A": 2030.0},
  "storage_lorentzian": {"y0": 0.132, "xc": 0.0, "w": 2.274, "A": 0.354},
  "epsilon": 0.0, "floor_rate": 0.0,
  "pair_rate": 1000000.0, "acquisition_seconds": 100.0, "seed": 7
})";

struct Workdir {
    Workdir() {
        dir = fs::current_path() / "cli_test_workdir";
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    fs::path dir;
    std::string path(const std::string& name) const { return (dir / name).string(); }
};

}  // namespace

TEST_CASE("exit codes follow the 0/2/3 contract") {
    Workdir wd;
    CHECK(run("simulate --config " + wd.path("missing.json") + " --out " +
              wd.path("x.csv")) == 3);

    write(wd.path("bad.json"),
          R"({"mode_min": -1, "mode_max": 1,
              "source_lorentzian": {"y0": 0, "xc": 0, "w": 1.0, "A": 1.0},
              "epsilon": 2.5, "floor_rate": 0, "pair_rate": 10,
              "acquisition_seconds": 1})");
    CHECK(run("simulate --config " + wd.path("bad.json") + " --out " + wd.path("x.csv")) ==
          2);

    CHECK(run("bogus-subcommand") == 2);
    CHECK(run("witness --counts " + wd.path("nothere.csv") + " --out " + wd.path("w.json")) ==
          3);
    CHECK(run("--version") == 0);
}

TEST_CASE("simulate is deterministic and manifests replay") {
    Workdir wd;
    write(wd.path("cfg.json"), kConfig);
    const std::string base = "simulate --config " + wd.path("cfg.json");
    REQUIRE(run(base + " --out " + wd.path("a.csv")) == 0);
    REQUIRE(run(base + " --out " + wd.path("b.csv")) == 0);
    CHECK(slurp(wd.path("a.csv")) == slurp(wd.path("b.csv")));

    // manifests are identical except for their own output path
    const json ma = json::parse(slurp(wd.path("a.csv.manifest.json")));
    const json mb = json::parse(slurp(wd.path("b.csv.manifest.json")));
    CHECK(ma.at("seed") == 42);
    CHECK(ma.at("outputs")[0].at("fnv1a64") == mb.at("outputs")[0].at("fnv1a64"));
    CHECK(ma.at("inputs")[0].at("fnv1a64") == mb.at("inputs")[0].at("fnv1a64"));

    // a different seed changes the data
    REQUIRE(run(base + " --seed 43 --out " + wd.path("c.csv")) == 0);
    CHECK(slurp(wd.path("a.csv")) != slurp(wd.path("c.csv")));

    // seed priority: the flag beats the config seed
    REQUIRE(run(base + " --seed 42 --out " + wd.path("d.csv")) == 0);
    CHECK(slurp(wd.path("a.csv")) == slurp(wd.path("d.csv")));
}

TEST_CASE("env seed is the lowest-priority source") {
    Workdir wd;
    // config without a seed field
    write(wd.path("cfg.json"), R"({
      "mode_min": -1, "mode_max": 1,
      "source_lorentzian": {"y0": 0.0, "xc": 0.0, "w": 1e9, "A": 1.0},
      "epsilon": 0.0, "floor_rate": 0.0,
      "pair_rate": 100000.0, "acquisition_seconds": 1.0
    })");
    const std::string base = "simulate --config " + wd.path("cfg.json");
    setenv("OAMSIM_SEED", "77", 1);
    REQUIRE(run(base + " --out " + wd.path("env.csv")) == 0);
    unsetenv("OAMSIM_SEED");
    REQUIRE(run(base + " --seed 77 --out " + wd.path("flag.csv")) == 0);
    CHECK(slurp(wd.path("env.csv")) == slurp(wd.path("flag.csv")));
}

TEST_CASE("tomo pipeline: simulate, reconstruct, self-compare") {
    Workdir wd;
    write(wd.path("cfg.json"), kConfig);
    REQUIRE(run("simulate --config " + wd.path("cfg.json") +
                " --measurement tomo --out " + wd.path("tomo.csv")) == 0);

    REQUIRE(run("tomo --counts " + wd.path("tomo.csv") + " --mc 40 --seed 5 --out " +
                wd.path("rec.json")) == 0);
    const json rec = json::parse(slurp(wd.path("rec.json")));
    CHECK(rec.at("reconstruction").at("converged").get<bool>());
    CHECK(rec.at("fidelity_to_ideal").at("value").get<double>() > 0.99);
    CHECK(rec.at("fidelity_to_ideal").at("sigma").get<double>() > 0.0);
    CHECK(rec.at("schmidt_rank3").at("pass").get<bool>());

    // the same dataset as both input and output: fidelity between = 1
    REQUIRE(run("tomo --counts " + wd.path("tomo.csv") + " --counts2 " +
                wd.path("tomo.csv") + " --mc 0 --out " + wd.path("f2.json")) == 0);
    const json f2 = json::parse(slurp(wd.path("f2.json")));
    CHECK(f2.at("fidelity_between").at("value").get<double>() ==
          doctest::Approx(1.0).epsilon(1e-6));

    // malformed csv is a validation failure
    write(wd.path("mangled.csv"), "j,k,counts\n1,1,notanumber\n");
    CHECK(run("tomo --counts " + wd.path("mangled.csv") + " --out " + wd.path("x.json")) ==
          2);
}

TEST_CASE("witness pipeline certifies the simulated ideal state") {
    Workdir wd;
    write(wd.path("cfg.json"), R"({
      "mode_min": -2, "mode_max": 1,
      "source_lorentzian": {"y0": 0.0, "xc": 0.0, "w": 1e9, "A": 1.0},
      "epsilon": 0.0, "floor_rate": 0.0,
      "pair_rate": 2000000.0, "acquisition_seconds": 1.0, "seed": 9
    })");
    REQUIRE(run("simulate --config " + wd.path("cfg.json") +
                " --measurement mub --modes -2,-1,0,1 --out " + wd.path("mub.csv")) == 0);
    REQUIRE(run("witness --counts " + wd.path("mub.csv") +
                " --mc 100 --seed 3 --out " + wd.path("report.json")) == 0);
    const json report = json::parse(slurp(wd.path("report.json")));
    CHECK(report.at("D").get<int>() == 4);
    CHECK(report.at("M").get<double>() > 9.0);  // M = 12 beats the d=4 bound of 9
    CHECK(report.at("certified_dimension_M").get<int>() == 4);
    CHECK(slurp(wd.path("report.json.txt")).find("M violates") != std::string::npos);

    // incomplete pair coverage: ask for a mode that was never measured
    CHECK(run("witness --counts " + wd.path("mub.csv") + " --modes -2,-1,0,1,2 --out " +
              wd.path("r2.json")) == 2);
}

TEST_CASE("witness reference annotations are attached on request") {
    Workdir wd;
    write(wd.path("cfg.json"), kConfig);
    REQUIRE(run("simulate --config " + wd.path("cfg.json") +
                " --measurement mub --modes -1,0,1 --out " + wd.path("mub.csv")) == 0);
    write(wd.path("ref.json"), R"({"dimensionality_witness": {"W_before_storage": {"value": 123.9}}})");
    REQUIRE(run("witness --counts " + wd.path("mub.csv") + " --mc 0 --reference " +
                wd.path("ref.json") + " --out " + wd.path("rep.json")) == 0);
    const json rep = json::parse(slurp(wd.path("rep.json")));
    CHECK(rep.contains("reference"));
}

TEST_CASE("fit command recovers simulated diagonal correlations") {
    Workdir wd;
    write(wd.path("cfg.json"), kWideConfig);
    REQUIRE(run("simulate --config " + wd.path("cfg.json") + " --out " +
                wd.path("corr.csv")) == 0);

    // extract the diagonal (m, m) counts into a fit input
    std::ifstream in(wd.path("corr.csv"));
    std::string line;
    std::getline(in, line);
    std::ostringstream fit_csv;
    fit_csv << "x,y\n";
    while (std::getline(in, line)) {
        std::stringstream row(line);
        std::string sa, sb, counts, seconds;
        std::getline(row, sa, ',');
        std::getline(row, sb, ',');
        std::getline(row, counts, ',');
        std::getline(row, seconds, ',');
        if (sa == sb) fit_csv << sa.substr(2) << "," << counts << "\n";
    }
    write(wd.path("diag.csv"), fit_csv.str());

    REQUIRE(run("fit --in " + wd.path("diag.csv") + " --poisson-weights --out " +
                wd.path("fit.json")) == 0);
    const json fit = json::parse(slurp(wd.path("fit.json")));
    CHECK(fit.at("params").at("w").get<double>() == doctest::Approx(7.7).epsilon(0.02));
    CHECK(fit.at("params").at("xc").get<double>() == doctest::Approx(0.0).epsilon(0.1));
    CHECK(fit.at("converged").get<bool>());

    // constant data is a degenerate fit -> validation exit
    write(wd.path("flat.csv"), "x,y\n-2,5\n-1,5\n0,5\n1,5\n2,5\n3,5\n");
    CHECK(run("fit --in " + wd.path("flat.csv") + " --out " + wd.path("f.json")) == 2);
}

TEST_CASE("mask command emits pgm pairs") {
    Workdir wd;
    REQUIRE(run("mask --m1 5 --m2 -1 --theta 0 --out " + wd.path("fork")) == 0);
    const std::string phase = slurp(wd.path("fork_phase.pgm"));
    CHECK(phase.substr(0, 3) == "P5\n");
    CHECK(phase.find("512 512") != std::string::npos);
    CHECK(phase.size() > 512 * 512);
    CHECK(fs::exists(wd.path("fork_intensity.pgm")));

    // m1 = m2 = 0 with theta 0: uniform phase image
    REQUIRE(run("mask --m1 0 --m2 0 --theta 0 --size 64 --out " + wd.path("flat")) == 0);
    const std::string flat = slurp(wd.path("flat_phase.pgm"));
    const std::string body = flat.substr(flat.find("255\n") + 4);
    REQUIRE(body.size() == 64 * 64);
    for (char c : body) CHECK(c == body[0]);

    // basis rendering emits both outcome masks
    REQUIRE(run("mask --m1 5 --m2 -1 --basis x --size 64 --out " + wd.path("bx")) == 0);
    CHECK(fs::exists(wd.path("bx_plus_phase.pgm")));
    CHECK(fs::exists(wd.path("bx_minus_phase.pgm")));
    CHECK(fs::exists(wd.path("bx_plus_intensity.pgm")));
    CHECK(fs::exists(wd.path("bx_minus_intensity.pgm")));

    CHECK(run("mask --m1 1 --m2 2 --theta 0 --basis x --out " + wd.path("bad")) == 2);
    CHECK(run("mask --m1 1 --m2 2 --out " + wd.path("bad2")) == 2);
}

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: cli_tests <path-to-oamsim> [doctest args]\n");
        return 1;
    }
    g_cli = argv[1];
    doctest::Context ctx;
    ctx.applyCommandLine(argc - 1, argv + 1);
    return ctx.run();
}
