#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"
#include "markovrng/cli.h"

using namespace markovrng;

namespace {

const std::string kBinary = std::string(MODELS_DIR) + "/binary_p01_q02.json";
const std::string kJoint = std::string(MODELS_DIR) + "/joint_a2.json";

struct Run {
  int code;
  std::string out, err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_CASE("grid parsing") {
  CHECK(parse_grid("0:1:0.25") == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
  CHECK(parse_grid("1,2.5,-3") == std::vector<double>{1.0, 2.5, -3.0});
  CHECK_THROWS(parse_grid("0:1:0"));
}

TEST_CASE("spectrum") {
  const auto r = run({"spectrum", "--model", kBinary, "--theta-grid", "0.5,1"});
  CHECK(r.code == kExitOk);
  const auto rows = csv_rows(r.out);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0][0] == "theta");
  CHECK(std::fabs(std::stod(rows[2][1]) + std::log(0.8123213)) < 1e-6);
  SUBCASE("bits") {
    const auto b = run({"--bits", "spectrum", "--model", kBinary, "--theta-grid", "1"});
    CHECK(std::stod(csv_rows(b.out)[1][1]) == doctest::Approx(std::stod(rows[2][1]) / std::log(2.0)).epsilon(1e-9));
  }
  SUBCASE("permutation kernel") {
    const std::string path = "cli_perm_model.json";
    std::ofstream(path) << R"({"x_size": 2, "y_size": 1, "kernel": [[0, 1], [1, 0]], "initial": [1, 0]})";
    const auto p = run({"spectrum", "--model", path, "--theta-grid", "-0.5,0.5,2"});
    CHECK(p.code == kExitOk);
    const auto pr = csv_rows(p.out);
    for (size_t i = 1; i < pr.size(); ++i) CHECK(std::fabs(std::stod(pr[i][1])) < 1e-12);
    std::remove(path.c_str());
  }
  SUBCASE("json") {
    const auto j = run({"spectrum", "--model", kJoint, "--theta-grid", "0.5", "--format", "json"});
    CHECK(j.code == kExitOk);
    CHECK(nlohmann::json::parse(j.out).is_object());
  }
}

TEST_CASE("assumptions") {
  const auto r = run({"assumptions", "--model", kJoint});
  CHECK(r.code == kExitOk);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["reports"][0]["holds"] == true);
  CHECK(j["reports"][1]["holds"] == true);
}

TEST_CASE("bound") {
  SUBCASE("achievability report") {
    const auto r = run({"bound", "--model", kBinary, "--n", "10000", "--rate", "0.3", "--theorem", "ach"});
    CHECK(r.code == kExitOk);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["quantity"] == "neg_log_delta_bar_lower");
    CHECK(j["value"].get<double>() > 0.0);
  }
  SUBCASE("log2M form") {
    const auto a = run({"bound", "--model", kBinary, "--n", "10000", "--log2M", "4000", "--theorem", "ach"});
    const auto j = nlohmann::json::parse(a.out);
    CHECK(j["rate"].get<double>() == doctest::Approx(4000.0 * std::log(2.0) / 10000.0));
  }
  SUBCASE("out of window is infeasible") {
    const auto r = run({"bound", "--model", kBinary, "--n", "10000", "--rate", "0.5", "--theorem", "conv_sphere"});
    CHECK(r.code == kExitInfeasible);
  }
  SUBCASE("validation errors") {
    CHECK(run({"bound", "--model", "missing.json", "--n", "10", "--rate", "0.3"}).code == kExitValidation);
    CHECK(run({"bound", "--model", kBinary, "--n", "10", "--rate", "0.3", "--theorem", "nope"}).code == kExitValidation);
    CHECK(run({"frobnicate"}).code == kExitValidation);
  }
  SUBCASE("assumption violations") {
    CHECK(run({"bound", "--model", kJoint, "--n", "100", "--rate", "0.1", "--theorem", "ach"}).code == kExitValidation);
  }
}

TEST_CASE("sweep") {
  const std::vector<std::string> args = {"sweep", "--model", kBinary, "--n", "10000", "--eps-min", "4", "--eps-max", "20", "--eps-step", "4"};
  const auto r = run(args);
  CHECK(r.code == kExitOk);
  const auto rows = csv_rows(r.out);
  CHECK(rows[0] == std::vector<std::string>{"n", "R", "epsilon", "theorem", "value", "theta_star", "s_star", "feasible", "clamped"});
  std::map<std::string, std::map<std::string, double>> rate;
  for (size_t i = 1; i < rows.size(); ++i) rate[rows[i][2]][rows[i][3]] = std::stod(rows[i][1]);
  CHECK(rate.size() == 5);
  for (const auto& [eps, by] : rate) {
    CHECK(by.at("ach") <= by.at("conv_sphere"));
    CHECK(by.at("ach") <= by.at("conv_strong"));
  }
  SUBCASE("byte-identical reruns") { CHECK(run(args).out == r.out); }
}

TEST_CASE("asymptotic") {
  const auto r = run({"asymptotic", "--model", kBinary, "--regime", "second_order", "--n", "10000", "--epsilon", "0.5"});
  CHECK(r.code == kExitOk);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["value"].get<double>() == doctest::Approx(3835.23).epsilon(1e-6));
  CHECK(run({"asymptotic", "--model", kBinary, "--regime", "bogus"}).code == kExitValidation);
}

TEST_CASE("extract") {
  const std::string out = "cli_extract.bin";
  const auto r = run({"extract", "--model", kBinary, "--n", "16", "--m", "4", "--blocks", "10", "--seed-hex",
                      "a5a5a5", "--out", out, "--audit", "exact"});
  CHECK(r.code == kExitOk);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["output_bits"] == 40);
  CHECK(j["audit"]["rigorous"] == true);
  std::ifstream f(out, std::ios::binary | std::ios::ate);
  CHECK(f.tellg() == 5);
  std::remove(out.c_str());
  CHECK(run({"extract", "--model", kBinary, "--n", "16", "--m", "4", "--seed-hex", "01"}).code == kExitValidation);
}

TEST_CASE("verify") {
  const auto r = run({"verify"});
  CHECK(r.code == kExitOk);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["all_pass"] == true);
}
