#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "bimax/cli.hpp"
#include "bimax/serialize.hpp"

using namespace bimax;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run cli(const std::vector<std::string> &args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string &name) {
    const fs::path dir = fs::temp_directory_path() / "bimax_cli_test";
    fs::create_directories(dir);
    return dir / name;
}

std::string slurp(const fs::path &p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_SUITE("cli") {

TEST_CASE("usage errors") {
    CHECK(cli({}).code == kExitUsage);
    CHECK(cli({"frobnicate"}).code == kExitUsage);
    CHECK(cli({"gen", "linear", "3", "3"}).code == kExitUsage);
    CHECK(cli({"solve", "--instance", scratch("missing.json").string()}).code == kExitUsage);
}

TEST_CASE("gen writes the instance and its digest") {
    const auto path = scratch("toyc.json");
    const auto r = cli({"gen", "toy-constrained", "--out", path.string()});
    REQUIRE(r.code == kExitOk);
    const std::string text = slurp(path);
    CHECK(r.out.rfind(content_digest(text), 0) == 0);
    const auto j = Json::parse(text);
    CHECK(j["family"] == "toy-constrained");
    CHECK(j["analytic_solution"]["x1"].get<double>() == 0.5);
    CHECK(j["analytic_solution"]["y1"].get<double>() == 0.5);
    CHECK(j["analytic_solution"]["upper_value"].get<double>() == 0.25);
    CHECK(j["constants"]["B"].get<double>() == 8);

    const auto lin = scratch("lin.json");
    REQUIRE(cli({"gen", "linear", "4", "3", "2", "--seed", "3", "--out", lin.string()}).code == kExitOk);
    const auto again = scratch("lin2.json");
    REQUIRE(cli({"gen", "linear", "--n", "4", "--m", "3", "--l", "2", "--seed", "3", "--out",
                 again.string()}).code == kExitOk);
    CHECK(slurp(lin) == slurp(again));
}

TEST_CASE("solve, budget exit code and report") {
    const auto inst = scratch("toyu.json");
    REQUIRE(cli({"gen", "toy-unconstrained", "--out", inst.string()}).code == kExitOk);
    const auto trace = scratch("toyu.trace.jsonl");
    const auto result = scratch("toyu.result.json");
    const auto ok = cli({"solve", "--instance", inst.string(), "--eps", "0.1", "--trace-out",
                         trace.string(), "--result-out", result.string()});
    CHECK(ok.code == kExitOk);
    CHECK(Json::parse(slurp(result)).contains("final"));

    const auto tight = cli({"solve", "--instance", inst.string(), "--eps", "0.01",
                            "--max-oracles", "1000"});
    CHECK(tight.code == kExitBudget);
    CHECK(cli({"solve", "--instance", inst.string(), "--eps", "0.5"}).code == kExitUsage);

    const auto rep = cli({"report", trace.string()});
    REQUIRE(rep.code == kExitOk);
    CHECK(rep.out.rfind("family,instance,seed,mode,row,final_upper_objective,"
                        "final_lower_optimality_gap,final_infeasibility,oracle_calls_total,"
                        "outer_iterations,wall_ms\n", 0) == 0);
    CHECK(rep.out.find("toy-unconstrained,") != std::string::npos);
}

TEST_CASE("multi-seed runs add summary rows") {
    const auto inst = scratch("toyu_ms.json");
    REQUIRE(cli({"gen", "toy-unconstrained", "--out", inst.string()}).code == kExitOk);
    const auto trace = scratch("ms.trace.jsonl");
    const auto r = cli({"solve", "--instance", inst.string(), "--eps", "0.2", "--mode", "stoch",
                        "--K", "3", "--sapd-T", "20", "--seeds", "1,2", "--trace-out",
                        trace.string()});
    REQUIRE(r.code == kExitOk);
    const auto t1 = scratch("ms.trace.seed1.jsonl"), t2 = scratch("ms.trace.seed2.jsonl");
    const auto rep = cli({"report", t1.string(), t2.string()});
    REQUIRE(rep.code == kExitOk);
    CHECK(rep.out.find(",mean,") != std::string::npos);
    CHECK(rep.out.find(",median,") != std::string::npos);
}

TEST_CASE("malformed trace lines are reported with their line number") {
    const auto inst = scratch("toyu_bad.json");
    REQUIRE(cli({"gen", "toy-unconstrained", "--out", inst.string()}).code == kExitOk);
    const auto trace = scratch("bad.trace.jsonl");
    REQUIRE(cli({"solve", "--instance", inst.string(), "--eps", "0.2", "--trace-out",
                 trace.string()}).code == kExitOk);
    std::string text = slurp(trace);
    const auto second = text.find('\n', text.find('\n') + 1);
    text.insert(second + 1, "{not json\n");
    std::ofstream(trace) << text;
    const auto rep = cli({"report", trace.string()});
    CHECK(rep.code == kExitUsage);
    CHECK(rep.err.find(trace.string() + ":3: malformed record") != std::string::npos);
}

}
