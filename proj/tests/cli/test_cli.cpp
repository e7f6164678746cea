// End-to-end checks of the command line tool: runs the real binary through
// the shell, captures stdout, and inspects reports, artifacts and exit codes.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunResult {
    int exit_code = -1;
    json report;
    std::string raw;
};

fs::path fresh_dir(const char* tag) {
    static int counter = 0;
    fs::path dir = fs::temp_directory_path() /
                   ("wlcli_" + std::string(tag) + "_" +
                    std::to_string(::getpid()) + "_" +
                    std::to_string(counter++));
    fs::create_directories(dir);
    return dir;
}

void write_file(const fs::path& path, const std::string& body) {
    std::ofstream out(path);
    out << body;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Runs the CLI with the working directory set to `dir` so that relative CSV
// artifacts stay inside the test sandbox.
RunResult run_cli(const fs::path& dir, const std::string& args) {
    const fs::path out = dir / "stdout.json";
    const std::string cmd = "cd " + dir.string() + " && " +
                            std::string(WISHARTLAB_CLI_PATH) + " " + args +
                            " > " + out.string() + " 2> stderr.txt";
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.raw = slurp(out);
    if (!r.raw.empty()) {
        r.report = json::parse(r.raw, nullptr, false);
    }
    return r;
}

int count_lines(const std::string& s) {
    int n = 0;
    for (char c : s)
        if (c == '\n') ++n;
    return n;
}

const char* kSampleConfig = R"({
  "command": "sample",
  "params": {"p": 1.0, "omega": [[1,1],[1,1]], "sigma": [[2,0.5],[0.5,1]]},
  "n": 6,
  "seed": 7,
  "out": "draws.csv"
})";

}  // namespace

TEST_CASE("validate reports the rule that fired") {
    fs::path dir = fresh_dir("validate");
    write_file(dir / "c.json", R"({
      "command": "validate",
      "params": {
        "p": 0.75,
        "omega": [[1,0,0],[0,1,0],[0,0,1]],
        "sigma": [[1,0,0],[0,1,0],[0,0,1]]
      }
    })");
    RunResult r = run_cli(dir, "validate --config c.json");
    CHECK(r.exit_code == 0);
    CHECK(r.report.at("header").at("command") == "validate");
    CHECK(r.report.at("header").at("schema_version") == 1);
    CHECK(r.report.at("result").at("status") == "Invalid");
    CHECK(r.report.at("result").at("rule_id") == "R3");
}

TEST_CASE("laplace at u = 0 reports exactly one") {
    fs::path dir = fresh_dir("laplace");
    write_file(dir / "c.json", R"({
      "command": "laplace",
      "process": {"p": 1.5, "beta": [[-0.2,0],[0,-0.4]], "q": [[1,0],[0,1]]},
      "t": 0.7,
      "u": [[0,0],[0,0]],
      "x": [[2,0.3],[0.3,1]]
    })");
    RunResult r = run_cli(dir, "laplace --config c.json");
    CHECK(r.exit_code == 0);
    CHECK(r.report.at("result").at("laplace").get<double>() == 1.0);
    CHECK(r.report.at("result").at("phi").get<double>() == 0.0);
}

TEST_CASE("sample writes the upper-triangle CSV") {
    fs::path dir = fresh_dir("sample");
    write_file(dir / "c.json", kSampleConfig);
    RunResult r = run_cli(dir, "sample --config c.json");
    CHECK(r.exit_code == 0);
    CHECK(r.report.at("result").at("method") == "GaussianSum");

    const std::string csv = slurp(dir / "draws.csv");
    CHECK(csv.rfind("x_0_0,x_0_1,x_1_1\n", 0) == 0);
    CHECK(count_lines(csv) == 7);  // header + six draws

    // Every CSV value must round-trip as a finite double.
    std::istringstream lines(csv);
    std::string line;
    std::getline(lines, line);
    while (std::getline(lines, line)) {
        std::istringstream fields(line);
        std::string field;
        int nfields = 0;
        while (std::getline(fields, field, ',')) {
            CHECK(std::isfinite(std::stod(field)));
            ++nfields;
        }
        CHECK(nfields == 3);
    }
}

TEST_CASE("reports are byte identical apart from the timestamp") {
    fs::path a = fresh_dir("det_a");
    fs::path b = fresh_dir("det_b");
    write_file(a / "c.json", kSampleConfig);
    write_file(b / "c.json", kSampleConfig);
    RunResult ra = run_cli(a, "sample --config c.json");
    RunResult rb = run_cli(b, "sample --config c.json");
    CHECK(ra.exit_code == 0);
    CHECK(rb.exit_code == 0);

    json ja = ra.report, jb = rb.report;
    ja.at("header").erase("timestamp");
    jb.at("header").erase("timestamp");
    CHECK(ja.dump() == jb.dump());
    CHECK(slurp(a / "draws.csv") == slurp(b / "draws.csv"));

    // A different seed must change the artifact.
    fs::path c = fresh_dir("det_c");
    write_file(c / "c.json", kSampleConfig);
    RunResult rc = run_cli(c, "sample --config c.json --seed 8");
    CHECK(rc.exit_code == 0);
    CHECK(rc.report.at("header").at("seed") == 8);
    CHECK(slurp(c / "draws.csv") != slurp(a / "draws.csv"));
}

TEST_CASE("simulate emits summary plus states CSV") {
    fs::path dir = fresh_dir("simulate");
    write_file(dir / "c.json", R"({
      "command": "simulate",
      "process": {"p": 2.0, "beta": [[-0.5,0],[0,-0.5]], "q": [[1,0],[0,1]]},
      "x": [[1,0],[0,1]],
      "T": 0.2,
      "dt": 0.01,
      "n": 50,
      "seed": 5,
      "scheme": "euler",
      "store_stride": 10,
      "u_grid": [[[0.3,0],[0,0.3]]],
      "out": "paths.csv"
    })");
    RunResult r = run_cli(dir, "simulate --config c.json");
    CHECK(r.exit_code == 0);
    const json& res = r.report.at("result");
    CHECK(res.at("paths") == 50);
    CHECK(res.at("steps") == 20);
    CHECK(res.at("endpoint_laplace").size() == 1);
    const json& ep = res.at("endpoint_laplace").at(0);
    const double mc = ep.at("mc_mean").get<double>();
    const double se = ep.at("mc_se").get<double>();
    const double closed = ep.at("transition_laplace").get<double>();
    CHECK(std::abs(mc - closed) < 4.0 * se + 0.05);

    const std::string csv = slurp(dir / "paths.csv");
    CHECK(csv.rfind("path,step,t,x_0_0,x_0_1,x_1_1,min_eig\n", 0) == 0);
    CHECK(count_lines(csv) == 1 + 50 * 3);  // t = 0, 0.1, 0.2 kept
}

TEST_CASE("hitprob stays at zero in the interior regime") {
    fs::path dir = fresh_dir("hitprob");
    write_file(dir / "c.json", R"({
      "command": "hitprob",
      "process": {"p": 2.5, "beta": [[-0.5,0],[0,-0.5]], "q": [[1,0],[0,1]]},
      "x": [[1,0],[0,1]],
      "T": 0.3,
      "dt": 0.005,
      "n": 100,
      "seed": 9,
      "eps": 1e-6
    })");
    RunResult r = run_cli(dir, "hitprob --config c.json");
    CHECK(r.exit_code == 0);
    CHECK(r.report.at("result").at("hits") == 0);
    CHECK(r.report.at("result").at("hit_fraction") == 0.0);
}

TEST_CASE("girsanov reweights toward the target transform") {
    fs::path dir = fresh_dir("girsanov");
    write_file(dir / "c.json", R"({
      "command": "girsanov",
      "source": {"p": 3.0, "beta": [[0,0],[0,0]], "q": [[1,0],[0,1]]},
      "target": {"p": 3.0, "beta": [[-0.3,0],[0,-0.3]], "q": [[1,0],[0,1]]},
      "x": [[6,0],[0,6]],
      "T": 0.3,
      "dt": 0.002,
      "n": 400,
      "seed": 12,
      "u_grid": [[[0.05,0],[0,0.05]]]
    })");
    RunResult r = run_cli(dir, "girsanov --config c.json");
    CHECK(r.exit_code == 0);
    const json& res = r.report.at("result");
    const double mean_w = res.at("mean_weight").get<double>();
    const double se_w = res.at("se_weight").get<double>();
    CHECK(std::abs(mean_w - 1.0) < 4.0 * se_w);
    const json& rw = res.at("reweighted").at(0);
    CHECK(std::abs(rw.at("mean").get<double>() -
                   rw.at("target_laplace").get<double>()) <
          4.0 * rw.at("se").get<double>() + 0.01);
}

TEST_CASE("verify battery passes at seed 42") {
    fs::path dir = fresh_dir("verify");
    RunResult r = run_cli(dir, "verify --seed 42");
    CHECK(r.exit_code == 0);
    CHECK(r.report.at("result").at("all_pass") == true);
    CHECK(r.report.at("result").at("checks").size() == 5);
    for (const json& check : r.report.at("result").at("checks")) {
        CHECK(check.at("pass") == true);
    }
}

TEST_CASE("every failure surfaces as structured error JSON") {
    fs::path dir = fresh_dir("errors");

    SUBCASE("missing config file") {
        RunResult r = run_cli(dir, "validate --config nope.json");
        CHECK(r.exit_code == 2);
        CHECK(r.report.at("error").at("code") == "ConfigError");
    }
    SUBCASE("malformed JSON") {
        write_file(dir / "broken.json", "{not json");
        RunResult r = run_cli(dir, "validate --config broken.json");
        CHECK(r.exit_code == 2);
        CHECK(r.report.at("error").at("code") == "ConfigError");
    }
    SUBCASE("missing required field") {
        write_file(dir / "c.json", R"({"command": "validate"})");
        RunResult r = run_cli(dir, "validate --config c.json");
        CHECK(r.exit_code == 2);
        CHECK(r.report.at("error").at("code") == "ConfigError");
        CHECK(r.report.at("error").at("message").get<std::string>().find(
                  "params") != std::string::npos);
    }
    SUBCASE("command mismatch between config and subcommand") {
        write_file(dir / "c.json", R"({"command": "sample"})");
        RunResult r = run_cli(dir, "validate --config c.json");
        CHECK(r.exit_code == 2);
        CHECK(r.report.at("error").at("code") == "ConfigError");
    }
    SUBCASE("module error propagates with its code") {
        write_file(dir / "c.json", R"({
          "command": "sample",
          "params": {
            "p": 0.75,
            "omega": [[1,0,0],[0,1,0],[0,0,1]],
            "sigma": [[1,0,0],[0,1,0],[0,0,1]]
          },
          "n": 3, "seed": 1, "out": "x.csv"
        })");
        RunResult r = run_cli(dir, "sample --config c.json");
        CHECK(r.exit_code == 1);
        CHECK(r.report.at("error").at("code") == "InvalidParams");
    }
    SUBCASE("unknown flag") {
        RunResult r = run_cli(dir, "validate --config c.json --bogus");
        CHECK(r.exit_code == 2);
        CHECK(r.report.at("error").at("code") == "ConfigError");
    }
    SUBCASE("negative time raises through the flow") {
        write_file(dir / "c.json", R"({
          "command": "laplace",
          "process": {"p": 1.0, "beta": [[0]], "q": [[1]]},
          "t": -1.0, "u": [[0.5]], "x": [[1]]
        })");
        RunResult r = run_cli(dir, "laplace --config c.json");
        CHECK(r.exit_code == 1);
        CHECK(r.report.at("error").at("code") == "InvalidParams");
    }
}

TEST_CASE("out-dir flag relocates artifacts") {
    fs::path dir = fresh_dir("outdir");
    fs::create_directories(dir / "artifacts");
    write_file(dir / "c.json", kSampleConfig);
    RunResult r = run_cli(dir, "sample --config c.json --out-dir artifacts");
    CHECK(r.exit_code == 0);
    CHECK(fs::exists(dir / "artifacts" / "draws.csv"));
    CHECK(r.report.at("result").at("csv") == "artifacts/draws.csv");
}

TEST_CASE("threads flag and env fallback are reflected in the header") {
    fs::path dir = fresh_dir("threads");
    write_file(dir / "c.json", kSampleConfig);

    RunResult r = run_cli(dir, "sample --config c.json --threads 3");
    CHECK(r.exit_code == 0);
    CHECK(r.report.at("header").at("threads") == 3);

    // Same draws regardless of worker count.
    fs::path dir2 = fresh_dir("threads2");
    write_file(dir2 / "c.json", kSampleConfig);
    RunResult r2 = run_cli(dir2, "sample --config c.json --threads 1");
    CHECK(slurp(dir / "draws.csv") == slurp(dir2 / "draws.csv"));

    const fs::path out = dir / "env_stdout.json";
    const std::string cmd = "cd " + dir.string() +
                            " && WISHARTLAB_THREADS=2 " +
                            std::string(WISHARTLAB_CLI_PATH) +
                            " sample --config c.json > " + out.string();
    REQUIRE(std::system(cmd.c_str()) == 0);
    json env_report = json::parse(slurp(out));
    CHECK(env_report.at("header").at("threads") == 2);
}
