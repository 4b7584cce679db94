#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include <json.hpp>

namespace {

struct CliResult {
    int code;
    std::string output;
};

// Runs the installed binary through the shell; stderr is merged so error
// tests can grep it, except where stdout must stay parseable.
CliResult run_cli(const std::string& args, bool merge_stderr = true) {
    const std::string cmd = std::string(QSD_PARTICLE_BIN) + " " + args +
                            (merge_stderr ? " 2>&1" : " 2>/dev/null");
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string out;
    char buf[4096];
    while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) out.append(buf, n);
    const int status = pclose(pipe);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string scratch_dir() {
    static std::string dir = [] {
        char tmpl[] = "/tmp/qsdp_cli_XXXXXX";
        REQUIRE(mkdtemp(tmpl) != nullptr);
        return std::string(tmpl);
    }();
    return dir;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    REQUIRE(out.good());
    out << content;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> cells;
    std::istringstream in(line);
    std::string cell;
    while (std::getline(in, cell, ',')) cells.push_back(cell);
    return cells;
}

std::string finite_model() {
    static std::string path = [] {
        const std::string p = scratch_dir() + "/bd2.json";
        write_file(p, R"({"version": 1, "type": "birth_death",
                          "birth": [0.3, 0.0], "death": [0.0, 0.4],
                          "kill": [0.2, 0.2]})");
        return p;
    }();
    return path;
}

} // namespace

TEST_CASE("help and argument errors") {
    CHECK(run_cli("--help").code == 0);
    CHECK(run_cli("--help").output.find("simulate") != std::string::npos);
    CHECK(run_cli("").code == 2);
    CHECK(run_cli("simulate --bogus 1").code == 2);
    CHECK(run_cli("frobnicate").code == 2);
}

TEST_CASE("oracle reports the frozen reference values as JSON") {
    const auto r = run_cli("oracle --model " + finite_model() + " --n 10", false);
    REQUIRE(r.code == 0);
    const auto doc = nlohmann::json::parse(r.output);

    const double contaminant = 3.0 / 7.0 * std::pow(0.125, 10.0);
    CHECK(doc["conditional"]["n"].get<long>() == 10);
    CHECK(doc["conditional"]["weights"][0].get<double>() ==
          doctest::Approx(4.0 / 7.0 + contaminant).epsilon(1e-9));
    CHECK(doc["survival_probability"].get<double>() ==
          doctest::Approx(0.1073741824).epsilon(1e-12));
    CHECK(doc["qsd"]["weights"][0].get<double>() ==
          doctest::Approx(4.0 / 7.0).epsilon(1e-9));
    CHECK(doc["qsd"]["lambda0"].get<double>() ==
          doctest::Approx(-std::log(0.8)).epsilon(1e-9));
    CHECK(doc["mixing"]["gamma"].get<double>() ==
          doctest::Approx(std::log(8.0)).epsilon(1e-4));
    CHECK(doc["mixing"]["underflowed"].get<bool>());
    CHECK(!doc["mixing"]["no_decay"].get<bool>());

    const std::string out = scratch_dir() + "/oracle.json";
    REQUIRE(run_cli("oracle --model " + finite_model() + " --n 10 --out " + out).code == 0);
    const auto filed = nlohmann::json::parse(slurp(out));
    CHECK(filed["survival_probability"] == doc["survival_probability"]);
}

TEST_CASE("oracle configuration errors") {
    CHECK(run_cli("oracle --model " + finite_model()).code == 2);
    CHECK(run_cli("oracle --model " + finite_model() + " --n -1").code == 2);
    CHECK(run_cli("oracle --model " + finite_model() + " --n 2 --init-state 5").code == 2);
    CHECK(run_cli("oracle --model /tmp/qsdp_nowhere.json --n 2").code == 2);
}

TEST_CASE("stochastic runs demand an explicit seed") {
    const std::string out = scratch_dir() + "/noseed.csv";
    const auto r = run_cli("simulate --model " + finite_model() +
                           " --N 20 --horizon 3 --out " + out);
    CHECK(r.code == 2);
    CHECK(r.output.find("seed") != std::string::npos);
}

TEST_CASE("simulate writes a per-step ensemble table, byte-stable under rerun") {
    const std::string out_a = scratch_dir() + "/sim_a.csv";
    const std::string out_b = scratch_dir() + "/sim_b.csv";
    const std::string args = "simulate --model " + finite_model() +
                             " --N 50 --horizon 5 --seed 7 --out ";
    const auto r = run_cli(args + out_a);
    REQUIRE(r.code == 0);
    CHECK(r.output.find("simulate: steps=5") != std::string::npos);

    const auto rows = lines_of(slurp(out_a));
    REQUIRE(rows.size() == 6);
    CHECK(rows[0] == "step,rebirths,loop_iters,bin_0,bin_1");
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto cells = split_csv(rows[i]);
        REQUIRE(cells.size() == 5);
        CHECK(cells[0] == std::to_string(i));
        const double mass = std::stod(cells[3]) + std::stod(cells[4]);
        CHECK(mass == doctest::Approx(1.0).epsilon(1e-9));
    }

    REQUIRE(run_cli(args + out_b).code == 0);
    CHECK(slurp(out_a) == slurp(out_b));

    CHECK(run_cli(args + out_a + " --replicas 2").code == 2);
}

TEST_CASE("convergence CSV and summary are worker-count invariant") {
    const std::string base = "convergence --model " + finite_model() +
                             " --N 30,60 --n 2 --replicas 4 --seed 3";
    const std::string out_a = scratch_dir() + "/conv_a.csv";
    const std::string out_b = scratch_dir() + "/conv_b.csv";
    REQUIRE(run_cli(base + " --workers 1 --out " + out_a).code == 0);
    REQUIRE(run_cli(base + " --workers 4 --out " + out_b).code == 0);

    const auto rows = lines_of(slurp(out_a));
    REQUIRE(rows.size() == 3);
    CHECK(rows[0] == "N,mean_abs_error,std_error,bound");
    CHECK(split_csv(rows[1])[0] == "30");
    CHECK(slurp(out_a) == slurp(out_b));

    const auto summary = nlohmann::json::parse(
        slurp(scratch_dir() + "/conv_a.summary.json"));
    CHECK(summary["experiment"] == "convergence");
    CHECK(summary.contains("fitted_slope"));
    CHECK(summary["slope_ci"].contains("lo"));
    CHECK(summary["seed"].get<std::uint64_t>() == 3);
    const auto summary_b = nlohmann::json::parse(
        slurp(scratch_dir() + "/conv_b.summary.json"));
    CHECK(summary["fitted_slope"] == summary_b["fitted_slope"]);
}

TEST_CASE("uniform sweep covers step 0 through the horizon") {
    const std::string out = scratch_dir() + "/uni.csv";
    const auto r = run_cli("uniform --model " + finite_model() +
                           " --N 40 --horizon 8 --replicas 3 --seed 5 --out " + out);
    REQUIRE(r.code == 0);
    const auto rows = lines_of(slurp(out));
    REQUIRE(rows.size() == 10);
    CHECK(rows[0] == "step,mean_abs_error");
    CHECK(split_csv(rows[1])[0] == "0");
    CHECK(split_csv(rows[9])[0] == "8");
    const auto summary = nlohmann::json::parse(slurp(scratch_dir() + "/uni.summary.json"));
    CHECK(summary.contains("sup_error"));
    CHECK(summary["drift_slope_ci"].contains("hi"));
}

TEST_CASE("qsd run reports its distance to the exact answer") {
    const std::string out = scratch_dir() + "/qsd.csv";
    const auto r = run_cli("qsd --model " + finite_model() +
                           " --N 50 --horizon 20 --seed 11 --out " + out);
    REQUIRE(r.code == 0);
    const auto rows = lines_of(slurp(out));
    REQUIRE(rows.size() == 3);
    CHECK(rows[0] == "bin,mass");
    const auto summary = nlohmann::json::parse(slurp(scratch_dir() + "/qsd.summary.json"));
    CHECK(summary["tv_to_exact"].get<double>() < 0.5);
    CHECK(summary["lambda0_exact"].get<double>() ==
          doctest::Approx(-std::log(0.8)).epsilon(1e-9));
}

TEST_CASE("continuous models write long-form occupancy tables") {
    const std::string diffusion = scratch_dir() + "/diffusion.json";
    write_file(diffusion, R"({"version": 1, "type": "diffusion", "beta": 3.0,
                              "substeps": 20, "bins": 10})");
    const std::string out = scratch_dir() + "/dqsd.csv";
    REQUIRE(run_cli("qsd --model " + diffusion +
                    " --N 40 --horizon 6 --seed 2 --out " + out).code == 0);
    auto rows = lines_of(slurp(out));
    REQUIRE(rows.size() >= 2);
    CHECK(rows[0] == "cell,mass");
    double mass = 0.0;
    for (std::size_t i = 1; i < rows.size(); ++i) mass += std::stod(split_csv(rows[i])[1]);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-9));

    const std::string neutron = scratch_dir() + "/neutron.json";
    write_file(neutron, R"({"version": 1, "type": "neutron", "grid_n": 4})");
    const std::string nsim = scratch_dir() + "/nsim.csv";
    REQUIRE(run_cli("simulate --model " + neutron +
                    " --N 20 --horizon 3 --seed 8 --out " + nsim).code == 0);
    rows = lines_of(slurp(nsim));
    REQUIRE(rows.size() >= 4);
    CHECK(rows[0] == "step,rebirths,loop_iters,cell,mass");
    double step1_mass = 0.0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto cells = split_csv(rows[i]);
        REQUIRE(cells.size() == 5);
        if (cells[0] == "1") step1_mass += std::stod(cells[4]);
    }
    CHECK(step1_mass == doctest::Approx(1.0).epsilon(1e-9));

    CHECK(run_cli("qsd --model " + diffusion + " --N 40 --horizon 6 --seed 2 --out " +
                  out + " --grid-n 1").code == 2);
    CHECK(run_cli("oracle --model " + neutron + " --n 2").code == 2);
}

TEST_CASE("a kernel that cannot sustain the ensemble exits as a model error") {
    const std::string model = scratch_dir() + "/doomed.json";
    // Survival mass 0.001 per state: the rebirth loop cannot finish a step
    // within a 15-iteration cap.
    write_file(model, R"({"version": 1, "type": "birth_death",
                          "birth": [0.0005, 0.0], "death": [0.0, 0.0005],
                          "kill": [0.999, 0.999]})");
    const std::string out = scratch_dir() + "/doomed.csv";
    const auto r = run_cli("simulate --model " + model +
                           " --N 10 --horizon 5 --seed 1 --iteration-cap 15 --out " + out);
    CHECK(r.code == 3);
    CHECK(r.output.find("stalled") != std::string::npos);

    CHECK(run_cli("simulate --model " + model +
                  " --N 10 --horizon 5 --seed 1 --iteration-cap 5 --out " + out)
              .code == 2);   // cap below the ensemble size is a config error
}

TEST_CASE("malformed model files are configuration errors") {
    const std::string bad = scratch_dir() + "/bad.json";
    write_file(bad, "{\"version\": 1, \"type\": \"birth_death\"");
    CHECK(run_cli("oracle --model " + bad + " --n 1").code == 2);

    write_file(bad, R"({"version": 1, "type": "birth_death",
                        "birth": [0.3], "death": [0.0], "kill": [0.2], "x": 1})");
    CHECK(run_cli("oracle --model " + bad + " --n 1").code == 2);
}
