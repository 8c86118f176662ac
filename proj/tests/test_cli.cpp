#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "speca/config.hpp"
#include "speca/report.hpp"

namespace fs = std::filesystem;
using namespace speca;

namespace {

std::string bin() {
    const char* b = std::getenv("SPECA_BIN");
    REQUIRE(b != nullptr);
    return b;
}

int run(const std::string& args) {
    std::string cmd = bin() + " " + args + " >/dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

fs::path tmp_dir() {
    fs::path d = fs::temp_directory_path() / "speca_cli_test";
    fs::create_directories(d);
    return d;
}

std::string write_cfg(const std::string& name, const std::string& body) {
    fs::path p = tmp_dir() / name;
    std::ofstream f(p);
    f << body;
    return p.string();
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

const char* kAnalyticCfg = R"({
  "seed": 7,
  "model": {"analytic": true},
  "engine": {"n_samples": 8},
  "analysis": {"reference_samples": 64}
})";

}  // namespace

TEST_CASE("config parsing contract") {
    RunConfig c = parse_config_text(kAnalyticCfg);
    CHECK(c.seed == 7);
    CHECK(c.model.analytic);
    CHECK(c.engine.n_samples == 8);
    CHECK(c.schedule.T == 50);  // documented default

    CHECK_THROWS_AS(parse_config_text("{}"), std::invalid_argument);  // seed mandatory
    CHECK_THROWS_AS(parse_config_text(R"({"seed": 1, "extra": 2})"),
                    std::invalid_argument);
    CHECK_THROWS_AS(parse_config_text(R"({"seed": 1, "gmm": {"radius": 4, "x": 1}})"),
                    std::invalid_argument);
    CHECK_THROWS_AS(parse_config_text("not json"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config_text(R"({"seed": 1, "trainer": {"lr": NaN}})"),
                    std::invalid_argument);
    CHECK_THROWS_AS(parse_config_text(R"({"seed": 1, "trainer": {"lr": -2}})"),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        parse_config_text(R"({"seed": 1, "verifier": {"decay": 1.5}})"),
        std::invalid_argument);
}

TEST_CASE("config round-trips parse -> emit -> parse") {
    RunConfig c = parse_config_text(kAnalyticCfg);
    std::string emitted = emit_config(c);
    RunConfig c2 = parse_config_text(emitted);
    CHECK(emit_config(c2) == emitted);
    CHECK(c2.seed == c.seed);
    CHECK(c2.engine.n_samples == c.engine.n_samples);
    CHECK(c2.verifier.tau0 == c.verifier.tau0);
}

TEST_CASE("baseline tag parsing") {
    RunConfig c = parse_config_text(kAnalyticCfg);
    BaselineConfig full = c.make_baseline_config("full");
    CHECK(full.kind == BaselineKind::Full);
    BaselineConfig fora = c.make_baseline_config("fora:5");
    CHECK(fora.kind == BaselineKind::Fora);
    CHECK(fora.anchor_gap == 5);
    BaselineConfig sr = c.make_baseline_config("step_reduction:0.25");
    CHECK(sr.fraction == 0.25);
    BaselineConfig fc = c.make_baseline_config("forecast_only:1:5");
    CHECK(fc.order == 1);
    CHECK(fc.anchor_gap == 5);
    CHECK_THROWS_AS(c.make_baseline_config("toca"), std::invalid_argument);
}

TEST_CASE("exit codes: happy path and config failures") {
    std::string cfg = write_cfg("ok.json", kAnalyticCfg);
    fs::path out = tmp_dir() / "run1";
    CHECK(run("run --config " + cfg + " --out " + out.string()) == 0);
    CHECK(fs::exists(out / "run.json"));
    CHECK(fs::exists(out / "steps.jsonl"));
    CHECK(fs::exists(out / "summary.csv"));
    CHECK(fs::exists(out / "allocation.csv"));

    CHECK(run("run --config /nonexistent/cfg.json --out " + out.string()) == 1);
    std::string bad = write_cfg("bad.json", R"({"seed": 1, "bogus": true})");
    CHECK(run("run --config " + bad + " --out " + out.string()) == 1);
    std::string nan_lr =
        write_cfg("nan.json", R"({"seed": 1, "trainer": {"lr": NaN}})");
    CHECK(run("train --config " + nan_lr + " --out " + out.string()) == 1);
    CHECK(run("sweep --config " + cfg + " --axis bogus --out " + out.string()) == 1);
    CHECK(run("analyze " + (tmp_dir() / "empty_dir").string()) == 1);
}

TEST_CASE("baseline full summary row has alpha 0 and S 1") {
    std::string cfg = write_cfg("ok.json", kAnalyticCfg);
    fs::path out = tmp_dir() / "run_full";
    REQUIRE(run("run --config " + cfg + " --baseline full --out " + out.string()) == 0);
    std::string csv = slurp(out / "summary.csv");
    std::istringstream ss(csv);
    std::string header, row;
    std::getline(ss, header);
    std::getline(ss, row);
    CHECK(header ==
          "tag,alpha,gamma,S_theoretical,S_measured,total_flops,energy_distance");
    CHECK(row.substr(0, 7) == "full,0,");
    std::istringstream rs(row);
    std::string field;
    std::getline(rs, field, ',');  // tag
    std::getline(rs, field, ',');  // alpha
    CHECK(field == "0");
    std::getline(rs, field, ',');  // gamma
    std::getline(rs, field, ',');  // S_theoretical
    CHECK(std::stod(field) == doctest::Approx(1.0));
    std::getline(rs, field, ',');  // S_measured
    CHECK(std::stod(field) == doctest::Approx(1.0));
}

TEST_CASE("fixed seed gives byte-identical artifacts") {
    std::string cfg = write_cfg("ok.json", kAnalyticCfg);
    fs::path o1 = tmp_dir() / "det1", o2 = tmp_dir() / "det2";
    REQUIRE(run("run --config " + cfg + " --out " + o1.string()) == 0);
    REQUIRE(run("run --config " + cfg + " --out " + o2.string()) == 0);
    for (const char* name : {"run.json", "steps.jsonl", "summary.csv",
                             "allocation.csv"})
        CHECK(slurp(o1 / name) == slurp(o2 / name));
}

TEST_CASE("seed override changes the run") {
    std::string cfg = write_cfg("ok.json", kAnalyticCfg);
    fs::path o1 = tmp_dir() / "seed1", o2 = tmp_dir() / "seed2";
    REQUIRE(run("run --config " + cfg + " --out " + o1.string()) == 0);
    REQUIRE(run("run --config " + cfg + " --seed 8 --out " + o2.string()) == 0);
    CHECK(slurp(o1 / "steps.jsonl") != slurp(o2 / "steps.jsonl"));
}

TEST_CASE("sweep emits a complete per-axis csv") {
    std::string cfg = write_cfg(
        "sweep.json",
        R"({"seed": 3, "model": {"analytic": true}, "analysis": )"
        R"({"sweep_samples": 4, "sweep_seeds": 2, "reference_samples": 32}})");
    fs::path out = tmp_dir() / "sweep_out";
    REQUIRE(run("sweep --config " + cfg + " --axis draft --no-plots --out " +
                out.string()) == 0);
    std::string csv = slurp(out / "draft.csv");
    int lines = 0;
    for (char ch : csv)
        if (ch == '\n') ++lines;
    CHECK(lines == 4);  // header + three draft kinds
    CHECK(csv.find("taylor") != std::string::npos);
    CHECK(csv.find("reuse") != std::string::npos);
    CHECK(csv.find("3;4") != std::string::npos);  // seed provenance
}

TEST_CASE("analyze over run artifacts is deterministic") {
    std::string cfg = write_cfg("ok.json", kAnalyticCfg);
    fs::path out = tmp_dir() / "an_run";
    REQUIRE(run("run --config " + cfg + " --out " + out.string()) == 0);
    REQUIRE(run("analyze " + out.string()) == 0);
    CHECK(fs::exists(out / "pca_trajectory.csv"));
    CHECK(fs::exists(out / "theorems.json"));
    std::string first = slurp(out / "theorems.json");
    std::string pca = slurp(out / "pca_trajectory.csv");
    REQUIRE(run("analyze " + out.string()) == 0);
    CHECK(slurp(out / "theorems.json") == first);
    CHECK(slurp(out / "pca_trajectory.csv") == pca);
}

TEST_CASE("train writes weights and loss curve") {
    std::string cfg = write_cfg(
        "train.json",
        R"({"seed": 5, "trainer": {"steps": 40, "batch": 8}})");
    fs::path out = tmp_dir() / "train_out";
    REQUIRE(run("train --config " + cfg + " --out " + out.string()) == 0);
    CHECK(fs::exists(out / "model.bin"));
    std::string loss = slurp(out / "loss.csv");
    CHECK(loss.rfind("iteration,loss\n", 0) == 0);
    int lines = 0;
    for (char ch : loss)
        if (ch == '\n') ++lines;
    CHECK(lines == 41);
}

TEST_CASE("steps log schema") {
    std::string cfg = write_cfg("ok.json", kAnalyticCfg);
    fs::path out = tmp_dir() / "schema_run";
    REQUIRE(run("run --config " + cfg + " --out " + out.string()) == 0);
    std::string steps = slurp(out / "steps.jsonl");
    std::istringstream ss(steps);
    std::string line;
    REQUIRE(std::getline(ss, line));
    CHECK(line.find("\"sample\"") != std::string::npos);
    CHECK(line.find("\"t\"") != std::string::npos);
    CHECK(line.find("\"kind\"") != std::string::npos);
    CHECK(line.find("\"e_k\"") != std::string::npos);
    CHECK(line.find("\"tau_t\"") != std::string::npos);
    CHECK(line.find("\"accepted\"") != std::string::npos);

    std::string runjson = slurp(out / "run.json");
    CHECK(runjson.find("\"schema_version\"") != std::string::npos);
}
