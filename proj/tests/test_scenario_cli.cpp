#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

#include <json.hpp>

#include "ramlab/scenario.hpp"

using namespace ramlab;
using Json = nlohmann::ordered_json;

namespace {

struct CliResult {
    int exit_code = -1;
    std::string out;
};

CliResult run_cli(const std::string& args) {
    const std::string cmd = std::string(RAMLAB_BIN) + " " + args + " 2>/dev/null";
    std::array<char, 4096> buf;
    CliResult res;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    while (std::size_t n = fread(buf.data(), 1, buf.size(), pipe))
        res.out.append(buf.data(), n);
    const int status = pclose(pipe);
    res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return res;
}

std::string scn(const std::string& name) {
    return std::string(SCENARIO_DIR) + "/" + name;
}

}  // namespace

TEST_CASE("scenario text round trips through the parser") {
    const char* text = R"(# comment line
[field]
characteristic = 0
p = 2
default_precision = 48

[extension]
layer = kummer -1@0

[run]
precision = 40
seed = 7
trials = 12
)";
    const Scenario sc = parse_scenario(text);
    REQUIRE(sc.characteristic == Characteristic::zero);
    REQUIRE(sc.p == 2);
    REQUIRE(sc.default_precision == 48);
    REQUIRE(sc.layers.size() == 1);
    REQUIRE(sc.layers[0].kind == LayerKind::kummer);
    REQUIRE(sc.layers[0].datum.to_string() == "-1@0");
    REQUIRE(sc.run.precision == 40);
    REQUIRE(sc.run.seed == 7);
    REQUIRE(sc.run.trials == 12);

    const std::string canon = serialize_scenario(sc);
    REQUIRE(serialize_scenario(parse_scenario(canon)) == canon);
}

TEST_CASE("tower levels and multiple layers parse") {
    const char* text = R"([field]
characteristic = 0
p = 3
default_precision = 64
tower = 1@1 1@1 1@0

[extension]
layer = kummer 1,1@0
layer = kummer 1@1
)";
    const Scenario sc = parse_scenario(text);
    REQUIRE(sc.tower.size() == 1);
    REQUIRE(sc.tower[0].size() == 3);
    REQUIRE(sc.tower[0][0].to_string() == "1@1");
    REQUIRE(sc.layers.size() == 2);
    REQUIRE(serialize_scenario(parse_scenario(serialize_scenario(sc))) ==
            serialize_scenario(sc));
}

TEST_CASE("parser rejects malformed input") {
    REQUIRE_THROWS_AS(parse_scenario(""), InputError);
    REQUIRE_THROWS_AS(parse_scenario("[field]\ncharacteristic = 0\np = 2\nbogus = 1\n"),
                      InputError);
    REQUIRE_THROWS_AS(parse_scenario("[weird]\n"), InputError);
    REQUIRE_THROWS_AS(parse_scenario("characteristic = 0\n"), InputError);
    // no extension layer
    REQUIRE_THROWS_AS(parse_scenario("[field]\ncharacteristic = 0\np = 2\n"),
                      InputError);
    // missing p
    REQUIRE_THROWS_AS(
        parse_scenario("[field]\ncharacteristic = 0\n[extension]\nlayer = kummer 1@1\n"),
        InputError);
    // bad layer kind
    REQUIRE_THROWS_AS(
        parse_scenario(
            "[field]\ncharacteristic = 0\np = 2\n[extension]\nlayer = cubic 1@1\n"),
        InputError);
    // unknown run key
    REQUIRE_THROWS_AS(
        parse_scenario("[field]\ncharacteristic = 0\np = 2\n[extension]\nlayer = "
                       "kummer -1@0\n[run]\nspeed = 9\n"),
        InputError);
    // non-numeric value
    REQUIRE_THROWS_AS(
        parse_scenario("[field]\ncharacteristic = 0\np = two\n[extension]\nlayer = "
                       "kummer -1@0\n"),
        InputError);
}

TEST_CASE("cli builds and validates a scenario") {
    const auto r = run_cli("build " + scn("q2i.scn"));
    REQUIRE(r.exit_code == 0);
    const Json j = Json::parse(r.out);
    REQUIRE(j["command"] == "build");
    REQUIRE(j["verdict"] == "pass");
    REQUIRE(j["extension"]["degree"] == 2);
    REQUIRE(j["validation"]["ok"] == true);
    REQUIRE(j["uniformizer_valuation"] == 1);
    REQUIRE(j["tool"]["name"] == "ramlab");
}

TEST_CASE("cli computes the filtration with structural checks") {
    const auto r = run_cli("ramify " + scn("charp_breaks_1_5.scn"));
    REQUIRE(r.exit_code == 0);
    const Json j = Json::parse(r.out);
    REQUIRE(j["ramification"]["lower_breaks"] == Json::array({1, 5}));
    REQUIRE(j["ramification"]["upper_breaks"] == Json::array({1, 3}));
    REQUIRE(j["ramification"]["t_G"] == 7);
    REQUIRE(j["ramification"]["hypothesis_ok"] == true);
    REQUIRE(j["verdict"] == "pass");
    for (const auto& c : j["structural_checks"]) REQUIRE(c["pass"] == true);
}

TEST_CASE("cli reports a failing hypothesis without failing the run") {
    const auto r = run_cli("ramify " + scn("example1_p2.scn"));
    REQUIRE(r.exit_code == 0);
    const Json j = Json::parse(r.out);
    REQUIRE(j["ramification"]["hypothesis_ok"] == false);
    REQUIRE(j["hypothesis"]["ok"] == false);
    REQUIRE(j["hypothesis"]["failing_upper_breaks"] == Json::array({2}));
}

TEST_CASE("cli sweep on the allowed class is all generators and deterministic") {
    const std::string args =
        "nbtest " + scn("q2i.scn") + " --valuation 1 --trials 20 --seed 9";
    const auto r1 = run_cli(args);
    REQUIRE(r1.exit_code == 0);
    Json j1 = Json::parse(r1.out);
    REQUIRE(j1["sweep"]["generator"] == 20);
    REQUIRE(j1["sweep"]["non_generator"] == 0);
    REQUIRE(j1["sweep"]["inconclusive"] == 0);
    REQUIRE(j1["verdict"] == "pass");

    const auto r2 = run_cli(args);
    Json j2 = Json::parse(r2.out);
    j1.erase("wall_time_ms");
    j2.erase("wall_time_ms");
    REQUIRE(j1.dump() == j2.dump());
}

TEST_CASE("cli sweep outside the allowed class records without asserting") {
    const auto r = run_cli("nbtest " + scn("q2i.scn") +
                           " --valuation 0 --trials 5 --seed 4");
    REQUIRE(r.exit_code == 0);
    const Json j = Json::parse(r.out);
    REQUIRE(j["verdict"] == "pass");
    const std::string pred = j["prediction"].get<std::string>();
    REQUIRE(pred.find("no uniform prediction") != std::string::npos);
}

TEST_CASE("cli witness certificate on a forbidden class") {
    const auto r = run_cli("rhov " + scn("q2i.scn") + " --valuation 0");
    REQUIRE(r.exit_code == 0);
    const Json j = Json::parse(r.out);
    REQUIRE(j["certificate"]["checks"]["trace_zero"] == true);
    REQUIRE(j["certificate"]["checks"]["nb_status"] == "non_generator");
    REQUIRE(j["certificate"]["checks"]["valuation_ok"] == true);
    REQUIRE(j["verdict"] == "pass");
}

TEST_CASE("cli witness requests on bad inputs exit with the input code") {
    // allowed class
    REQUIRE(run_cli("rhov " + scn("q2i.scn") + " --valuation 1").exit_code == 3);
    // hypothesis fails on this scenario
    REQUIRE(run_cli("rhov " + scn("example1_p2.scn") + " --valuation 1").exit_code ==
            3);
    // missing scenario file
    REQUIRE(run_cli("rhov /nonexistent.scn --valuation 0").exit_code == 3);
    // unknown suite
    REQUIRE(run_cli("verify " + scn("q2i.scn") + " --suite bogus").exit_code == 3);
    // subfield suite needs a noncyclic extension
    REQUIRE(run_cli("verify " + scn("q2i.scn") + " --suite subfield-trace")
                .exit_code == 3);
}

TEST_CASE("cli rejects malformed scenario files") {
    const std::string path = "/tmp/ramlab_bad_scenario.scn";
    {
        std::ofstream f(path);
        f << "[field]\ncharacteristic = 0\np = 2\nmystery = 1\n";
    }
    REQUIRE(run_cli("ramify " + path).exit_code == 3);
    std::remove(path.c_str());
}

TEST_CASE("cli verify runs the full suite set") {
    const auto r = run_cli("verify " + scn("q2i.scn") + " --suite all --trials 12");
    REQUIRE(r.exit_code == 0);
    const Json j = Json::parse(r.out);
    REQUIRE(j["verdict"] == "pass");
    REQUIRE(j["suites"].size() == 4);
    for (const auto& s : j["suites"]) REQUIRE(s["passed"] == true);
}

TEST_CASE("cli verify honors the hypothesis gate on the negative control") {
    const auto r = run_cli("verify " + scn("biquadratic_q2.scn") +
                           " --suite class-dichotomy --trials 6");
    REQUIRE(r.exit_code == 0);
    const Json j = Json::parse(r.out);
    REQUIRE(j["verdict"] == "pass");
    bool saw_gate = false;
    for (const auto& s : j["suites"])
        for (const auto& c : s["checks"])
            if (c["name"] == "hypothesis_gate") {
                saw_gate = true;
                const std::string detail = c["detail"].get<std::string>();
                REQUIRE(detail.find("not asserted") != std::string::npos);
            }
    REQUIRE(saw_gate);
}

TEST_CASE("cli writes the report to a file when asked") {
    const std::string out = "/tmp/ramlab_report_test.json";
    const auto r = run_cli("ramify " + scn("q2i.scn") + " --out " + out);
    REQUIRE(r.exit_code == 0);
    REQUIRE(r.out.empty());
    std::ifstream f(out);
    REQUIRE(f.good());
    Json j;
    f >> j;
    REQUIRE(j["command"] == "ramify");
    std::remove(out.c_str());
}

TEST_CASE("environment variable sets the default precision cap") {
    const std::string cmd = "RAMLAB_PRECISION_CAP=256 " + std::string(RAMLAB_BIN) +
                            " ramify " + scn("q2i.scn") + " 2>/dev/null";
    std::array<char, 4096> buf;
    std::string out;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    while (std::size_t n = fread(buf.data(), 1, buf.size(), pipe))
        out.append(buf.data(), n);
    REQUIRE(WEXITSTATUS(pclose(pipe)) == 0);
    const Json j = Json::parse(out);
    REQUIRE(j["parameters"]["precision_cap"] == 256);

    // an explicit flag wins over the environment
    const auto r = run_cli("ramify " + scn("q2i.scn") + " --precision-cap 512");
    REQUIRE(Json::parse(r.out)["parameters"]["precision_cap"] == 512);
}
