#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "confound/config.hpp"
#include "confound/errors.hpp"

#ifndef CONFOUND_CLI_PATH
#define CONFOUND_CLI_PATH "confound"
#endif

namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
    const std::string cmd = std::string(CONFOUND_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::path("/tmp") / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
};

}  // namespace

TEST_CASE("config parsing: key=value and JSON forms") {
    using confound::RunConfig;
    const RunConfig plain = RunConfig::from_text(
        "# comment\n"
        "data = input.csv\n"
        "learner.l2 = 0.01\n"
        "feature_cols = x1, x2 ,x3\n");
    CHECK(plain.get("data") == "input.csv");
    CHECK(plain.get_double("learner.l2", 0) == doctest::Approx(0.01));
    CHECK(plain.get_list("feature_cols") == std::vector<std::string>{"x1", "x2", "x3"});

    const RunConfig json = RunConfig::from_text(
        R"({"data": "input.csv", "learner": {"l2": 0.01, "kind": "ols"}, "feature_cols": ["x1","x2"]})");
    CHECK(json.get("data") == "input.csv");
    CHECK(json.get("learner.kind") == "ols");
    CHECK(json.get_double("learner.l2", 0) == doctest::Approx(0.01));
    CHECK(json.get_list("feature_cols") == std::vector<std::string>{"x1", "x2"});

    CHECK_THROWS_AS(RunConfig::from_text("not a key value line\n"), confound::ValidationError);
    CHECK_THROWS_AS(plain.get("nope"), confound::ValidationError);
}

TEST_CASE("cli end to end: generate, analyze, determinism across threads") {
    TempDir dir("confound_cli_e2e");
    const auto data = (dir.path / "data.csv").string();
    REQUIRE(run_cli("generate --model classification --n 240 --seed 5 --out-file " + data) == 0);

    std::ofstream cfg(dir.path / "cfg.txt");
    cfg << "data = " << data << "\n"
        << "feature_cols = x*\nresponse_col = y\nconfounder_cols = c\n"
        << "confounder_cuts.c = 0.5\ntask = classification\ntest_fraction = 0.3\nb = 120\n";
    cfg.close();

    const auto out1 = (dir.path / "out1").string();
    const auto out2 = (dir.path / "out2").string();
    REQUIRE(run_cli("analyze --config " + (dir.path / "cfg.txt").string() +
                    " --seed 9 --threads 1 --out " + out1) == 0);
    REQUIRE(run_cli("analyze --config " + (dir.path / "cfg.txt").string() +
                    " --seed 9 --threads 2 --out " + out2) == 0);

    SUBCASE("outputs are byte-identical across worker counts") {
        for (const char* name : {"report.json", "nulls_restricted.csv", "nulls_standard.csv",
                                 "manifest.json"}) {
            CHECK(slurp(dir.path / "out1" / name) == slurp(dir.path / "out2" / name));
        }
    }
    SUBCASE("report round-trips through its schema") {
        const auto text = slurp(dir.path / "out1" / "report.json");
        const auto parsed = nlohmann::ordered_json::parse(text);
        CHECK(parsed.dump(2) + "\n" == text);
        CHECK(parsed["metric"] == "auc");
        CHECK(parsed["observed"].is_number());
        CHECK(parsed["response_test"]["p"].is_number());
        CHECK(parsed["confounding_test"]["b"] == parsed["n_test"]);
        CHECK(parsed["corrected"]["method"] == "gaussian");
    }
    SUBCASE("confounded fixture: corrected below observed, confounding detected") {
        const auto parsed = nlohmann::ordered_json::parse(slurp(dir.path / "out1" / "report.json"));
        CHECK(parsed["confounding_test"]["p"].get<double>() < 0.05);
        CHECK(parsed["corrected"]["corrected"].get<double>() <
              parsed["observed"].get<double>());
    }
}

TEST_CASE("cli analyze on an unconfounded fixture leaves the metric nearly unchanged") {
    TempDir dir("confound_cli_uncf");
    const auto data = (dir.path / "data.csv").string();
    std::ofstream gen_cfg(dir.path / "gen.txt");
    gen_cfg << "gen.cor = 0.0\ngen.beta = 1.0\ngen.theta = 1.0\n";
    gen_cfg.close();
    REQUIRE(run_cli("generate --model classification --n 600 --seed 6 --config " +
                    (dir.path / "gen.txt").string() + " --out-file " + data) == 0);

    std::ofstream cfg(dir.path / "cfg.txt");
    cfg << "data = " << data << "\n"
        << "feature_cols = x*\nresponse_col = y\nconfounder_cols = c\n"
        << "confounder_cuts.c = 0.5\ntask = classification\ntest_fraction = 0.5\nb = 400\n";
    cfg.close();
    const auto out = (dir.path / "out").string();
    REQUIRE(run_cli("analyze --config " + (dir.path / "cfg.txt").string() +
                    " --seed 10 --threads 2 --out " + out) == 0);
    const auto parsed = nlohmann::ordered_json::parse(slurp(dir.path / "out" / "report.json"));
    const double observed = parsed["observed"].get<double>();
    const double corrected = parsed["corrected"]["corrected"].get<double>();
    CHECK(std::abs(corrected - observed) < 0.02);
}

TEST_CASE("cli error records carry exit codes and fields") {
    TempDir dir("confound_cli_err");
    const auto data = (dir.path / "data.csv").string();
    REQUIRE(run_cli("generate --model classification --n 100 --seed 5 --out-file " + data) == 0);

    std::ofstream cfg(dir.path / "cfg.txt");
    cfg << "data = " << data << "\n"
        << "feature_cols = x*\nresponse_col = not_there\nconfounder_cols = c\n"
        << "confounder_cuts.c = 0.5\ntask = classification\n";
    cfg.close();
    const auto out = (dir.path / "out").string();
    fs::create_directories(out);
    CHECK(run_cli("analyze --config " + (dir.path / "cfg.txt").string() + " --out " + out) == 1);
    const auto err = nlohmann::ordered_json::parse(slurp(dir.path / "out" / "error.json"));
    CHECK(err["error"]["type"] == "validation");
    CHECK(err["error"]["field"] == "response_col");

    SUBCASE("unknown subcommand fails") { CHECK(run_cli("frobnicate") != 0); }
}

TEST_CASE("cli partials command emits the comparison table") {
    TempDir dir("confound_cli_partials");
    const auto data = (dir.path / "corr.csv").string();
    REQUIRE(run_cli("generate --model correlation --n 300 --seed 8 --out-file " + data) == 0);

    std::ofstream cfg(dir.path / "cfg.txt");
    cfg << "data = " << data << "\nx_col = x\ny_col = y\nconfounder_cols = c\n"
        << "confounder_cuts.c = 0.5\nb = 200\n";
    cfg.close();
    const auto out = (dir.path / "out").string();
    REQUIRE(run_cli("partials --config " + (dir.path / "cfg.txt").string() +
                    " --seed 3 --threads 2 --out " + out) == 0);
    const std::string table = slurp(dir.path / "out" / "partials.csv");
    CHECK(table.find("theorem1_cov,closed_form") != std::string::npos);
    CHECK(table.find("theorem2_dcor,monte_carlo") != std::string::npos);
    // closed-form theorem-1 row matches its definitional reference
    std::istringstream lines(table);
    std::string line;
    std::getline(lines, line);  // header
    std::getline(lines, line);  // theorem1_cov closed_form row
    const auto last_comma = line.rfind(',');
    CHECK(std::stod(line.substr(last_comma + 1)) < 1e-10);
}
