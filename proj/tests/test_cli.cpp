#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"

namespace {

struct RunResult {
    int code;
    std::string out;
    std::string err;
};

RunResult run_cli(const std::vector<std::string>& args) {
    std::vector<const char*> argv{"ellipvol"};
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code =
        ellipvol::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

}  // namespace

TEST_CASE("forward json schema and values") {
    const RunResult r = run_cli({"forward", "--axes", "1,1,1", "--format", "json"});
    CHECK(r.code == 0);
    CHECK(r.out.find("\"v1\":4.0") != std::string::npos);
    CHECK(r.out.find("\"v2\":6.28318530") != std::string::npos);
    CHECK(r.out.find("\"v3\":4.18879020") != std::string::npos);
}

TEST_CASE("forward human format rounds to nine significant digits") {
    const RunResult r = run_cli({"forward", "--axes", "2,1,1"});
    CHECK(r.code == 0);
    CHECK(r.out.find("v1 = 5.52069199") != std::string::npos);
}

TEST_CASE("forward csv carries machine precision") {
    const RunResult r = run_cli({"forward", "--axes", "2,1,1", "--format", "csv"});
    CHECK(r.code == 0);
    CHECK(r.out.rfind("v1,v2,v3\n", 0) == 0);
    // 17 significant digits -> at least 16 characters in the v1 field.
    const std::string row = r.out.substr(r.out.find('\n') + 1);
    CHECK(row.substr(0, row.find(',')).size() >= 16);
}

TEST_CASE("invert round trip through the CLI") {
    const RunResult r =
        run_cli({"invert", "--volumes", "4,6.283185307,4.188790205", "--format", "json"});
    CHECK(r.code == 0);
    CHECK(r.out.find("\"status\":\"Converged\"") != std::string::npos);
    CHECK(r.out.find("\"axes\":[1.000") != std::string::npos);
}

TEST_CASE("invert infeasible target returns exit code 1") {
    const RunResult r = run_cli({"invert", "--volumes", "1,6.283185307,4.188790205"});
    CHECK(r.code == 1);
    CHECK(r.out.find("Infeasible") != std::string::npos);
}

TEST_CASE("invert non-convergent target returns exit code 3") {
    const RunResult r =
        run_cli({"invert", "--volumes", "4,1000,4.188790205", "--max-iter", "40"});
    CHECK(r.code == 3);
    CHECK(r.out.find("NoConvergence") != std::string::npos);
}

TEST_CASE("mc output schema") {
    const RunResult r = run_cli({"mc", "tsirelson", "--axes", "1,1,1", "--m", "3", "--samples",
                                 "20000", "--seed", "1", "--format", "json"});
    CHECK(r.code == 0);
    CHECK(r.out.find("\"mean\":") != std::string::npos);
    CHECK(r.out.find("\"std_error\":") != std::string::npos);
    CHECK(r.out.find("\"samples\":20000") != std::string::npos);
}

TEST_CASE("identical seeded command lines are byte-identical") {
    const std::vector<std::string> cmd{"mc",        "kubota", "--axes",  "2,1,0.5",
                                       "--k",       "1",      "--samples", "50000",
                                       "--seed",    "42",     "--streams", "4",
                                       "--format",  "json"};
    const RunResult a = run_cli(cmd);
    const RunResult b = run_cli(cmd);
    CHECK(a.code == 0);
    CHECK(a.out == b.out);

    auto reseeded = cmd;
    reseeded[9] = "43";
    CHECK(run_cli(reseeded).out != a.out);
}

TEST_CASE("verify subcommands succeed on their contracts") {
    CHECK(run_cli({"verify", "kernel", "--grid", "50"}).code == 0);
    CHECK(run_cli({"verify", "identity", "--samples", "200"}).code == 0);
    CHECK(run_cli({"verify", "lemma1", "--c", "1", "--samples", "120"}).code == 0);
    CHECK(run_cli({"verify", "lemma2", "--count", "10"}).code == 0);
}

TEST_CASE("mc steiner reports both sides") {
    const RunResult r = run_cli({"mc", "steiner", "--axes", "1,1,1", "--t", "0.5", "--samples",
                                 "20000", "--seed", "9", "--format", "json"});
    CHECK(r.code == 0);
    CHECK(r.out.find("\"polynomial\":14.137") != std::string::npos);
}

TEST_CASE("trace writes the CSV export") {
    const std::string path = "cli_trace_test.csv";
    const RunResult r = run_cli({"trace", "--axes", "1.6,1.2,0.9", "--step", "0.08",
                                 "--max-steps", "1000", "--out", path, "--format", "json"});
    CHECK(r.code == 0);
    CHECK(r.out.find("\"closed\":true") != std::string::npos);
    CHECK(r.out.find("\"symmetric_points\":6") != std::string::npos);

    std::ifstream fs(path);
    REQUIRE(fs.good());
    std::string header;
    std::getline(fs, header);
    CHECK(header == "a,b,c,v2,arc_index");
    std::remove(path.c_str());
}

TEST_CASE("usage errors return 1 and explain themselves") {
    const RunResult missing = run_cli({"forward"});
    CHECK(missing.code == 1);
    CHECK((missing.err.find("--axes") != std::string::npos ||
           missing.err.find("required") != std::string::npos));

    const RunResult bad_axes = run_cli({"forward", "--axes", "1,2"});
    CHECK(bad_axes.code == 1);

    const RunResult neg = run_cli({"forward", "--axes", "1,-2,1"});
    CHECK(neg.code == 1);
    CHECK(neg.err.find("positive") != std::string::npos);

    CHECK(run_cli({}).code == 1);
    CHECK(run_cli({"mc"}).code == 1);
}

TEST_CASE("degenerate trace start returns 1") {
    const RunResult r = run_cli({"trace", "--axes", "1,1,1", "--step", "0.02", "--max-steps",
                                 "100", "--out", "unused.csv"});
    CHECK(r.code == 1);
    CHECK(r.err.find("ball") != std::string::npos);
}

TEST_CASE("--help exits zero") {
    CHECK(run_cli({"--help"}).code == 0);
    CHECK(run_cli({"forward", "--help"}).code == 0);
}
