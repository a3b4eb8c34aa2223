#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "critpeak/cli.hpp"

using namespace critpeak;
using namespace critpeak::cli;
using Catch::Approx;

namespace {
std::string slurp(const std::string& path) {
    std::ifstream f(path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

RunConfig base(const std::string& cmd, const std::string& out) {
    RunConfig cfg;
    cfg.command = cmd;
    cfg.out = out;
    return cfg;
}
}  // namespace

TEST_CASE("constants command emits positive fields") {
    auto cfg = base("constants", "/tmp/critpeak_test_constants.json");
    cfg.N = 4;
    cfg.s = 1.0;  // boundary family: B reported as the log-case constant
    REQUIRE(run(cfg) == 0);
    auto j = nlohmann::json::parse(slurp(cfg.out));
    for (const char* k : {"A", "B", "omega_N", "S"}) {
        REQUIRE(j.contains(k));
        CHECK(double(j[k]) > 0.0);
    }
}

TEST_CASE("constants: divergent B surfaces as exit code 3") {
    auto cfg = base("constants", "/tmp/critpeak_test_constants_bad.json");
    cfg.N = 3;
    cfg.s = 1.0;  // (N-2)(s+1) = 2 < 3: genuinely divergent
    CHECK(run(cfg) == 3);
}

TEST_CASE("reduced command: NoSolution verdict for N=5, s=1") {
    auto cfg = base("reduced", "/tmp/critpeak_test_reduced.json");
    cfg.N = 5;
    cfg.s = 1.0;
    cfg.eps_list = {1e-3};
    REQUIRE(run(cfg) == 0);
    auto j = nlohmann::json::parse(slurp(cfg.out));
    REQUIRE(j.is_array());
    CHECK(j[0]["regime"] == "NoSolution");
    CHECK(j[0].contains("certificate"));
}

TEST_CASE("reduced command: PowerLaw output round-trips") {
    auto cfg = base("reduced", "/tmp/critpeak_test_reduced2.json");
    cfg.N = 5;
    cfg.s = 2.0;
    cfg.eps_list = {1e-3};
    REQUIRE(run(cfg) == 0);
    auto j = nlohmann::json::parse(slurp(cfg.out));
    CHECK(j[0]["regime"] == "PowerLaw");
    CHECK(double(j[0]["peaks"][0]["height"]) > 0.0);
    // reemit-parse identity
    const std::string text = slurp(cfg.out);
    CHECK(nlohmann::json::parse(text).dump(2) + "\n" == text);
}

TEST_CASE("validation errors exit with status 2") {
    auto cfg = base("reduced", "");
    cfg.N = 2;  // invalid dimension
    CHECK(run(cfg) == 2);
    auto cfg2 = base("unknown-command", "");
    CHECK(run(cfg2) == 2);
    auto cfg3 = base("reduced", "");
    cfg3.N = 5;
    cfg3.s = 2.0;  // missing --eps
    CHECK(run(cfg3) == 2);
}

TEST_CASE("lemma-check emits the CSV ladder schema") {
    auto cfg = base("lemma-check", "/tmp/critpeak_test_lemma.csv");
    cfg.N = 5;
    cfg.s = 2.0;
    cfg.d = 0.25;
    REQUIRE(run(cfg) == 0);
    const std::string csv = slurp(cfg.out);
    REQUIRE(csv.rfind("kind,lambda,value,leading,ratio\n", 0) == 0);
    // 5 kinds x 5 ladder rungs
    int rows = 0;
    for (char c : csv)
        if (c == '\n') ++rows;
    CHECK(rows == 1 + 5 * 5);
}

TEST_CASE("branch command writes the documented CSV and is deterministic") {
    auto cfg = base("branch", "/tmp/critpeak_test_branch.csv");
    cfg.N = 5;
    cfg.s = 2.0;
    cfg.eps_range = {1e-1, 2e-2};
    cfg.M = 400;
    cfg.grade = 5.0;
    cfg.steps_per_decade = 4;
    REQUIRE(run(cfg) == 0);
    const std::string first = slurp(cfg.out);
    REQUIRE(run(cfg) == 0);
    CHECK(slurp(cfg.out) == first);  // byte-identical across repeated runs
    CHECK(first.rfind("eps,u0,lambda,w_rel,pohozaev_residual,newton_iters\n", 0) == 0);
}

TEST_CASE("uniqueness command reports coincidence") {
    auto cfg = base("uniqueness", "/tmp/critpeak_test_uniq.json");
    cfg.N = 5;
    cfg.s = 2.0;
    cfg.eps_list = {0.05};
    cfg.M = 800;
    REQUIRE(run(cfg) == 0);
    auto j = nlohmann::json::parse(slurp(cfg.out));
    CHECK(j["same"] == true);
}

TEST_CASE("pohozaev command emits the report array") {
    auto cfg = base("pohozaev", "/tmp/critpeak_test_poh.json");
    cfg.N = 4;
    cfg.s = 2.0;
    cfg.eps_list = {0.02};
    cfg.M = 800;
    cfg.d = 0.3;
    REQUIRE(run(cfg) == 0);
    auto j = nlohmann::json::parse(slurp(cfg.out));
    REQUIRE(j.is_array());
    CHECK(j[0]["identity"] == "translation");
    CHECK(j[1]["identity"] == "dilation");
    CHECK(double(j[1]["relative_residual"]) < 1e-2);
}

TEST_CASE("JSON config file merges under flag precedence") {
    const std::string cfg_path = "/tmp/critpeak_test_cfg.json";
    {
        std::ofstream f(cfg_path);
        f << R"({"N": 5, "s": 2.0, "eps": [1e-3], "Q": "paraboloid", "M": 256})";
    }
    RunConfig cfg;
    cfg.command = "reduced";
    cfg.config_file = cfg_path;
    cfg.out = "/tmp/critpeak_test_cfgout.json";
    std::ifstream f(cfg_path);
    nlohmann::json j;
    f >> j;
    // "N" pretends to be set on the command line and must win
    cfg.N = 6;
    detail::apply_json_config(cfg, j, {"N"});
    CHECK(cfg.N == 6);
    CHECK(cfg.s == 2.0);
    REQUIRE(cfg.eps_list.size() == 1);
    CHECK(cfg.eps_list[0] == Approx(1e-3));
    CHECK(cfg.M == 256);
}

TEST_CASE("argv entry point parses subcommands and flags") {
    const char* argv[] = {"critpeak", "constants", "--N",  "5",
                          "--s",      "1.5",       "--out", "/tmp/critpeak_test_argv.json"};
    CHECK(cli::main(8, const_cast<char**>(argv)) == 0);
    auto j = nlohmann::json::parse(slurp("/tmp/critpeak_test_argv.json"));
    CHECK(int(j["N"]) == 5);
    CHECK(double(j["s"]) == 1.5);
}
