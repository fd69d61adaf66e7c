#include "catch_amalgamated.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "sgdinfer/cli.hpp"

using namespace sgdinfer::cli;
namespace fs = std::filesystem;

namespace {

RunConfig parse(std::vector<std::string> args) {
  args.insert(args.begin(), "sgdinfer");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return parse_args(static_cast<int>(argv.size()), argv.data());
}

int main_with(std::vector<std::string> args, std::string* err_text = nullptr) {
  args.insert(args.begin(), "sgdinfer");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = main_entry(static_cast<int>(argv.size()), argv.data(), out, err);
  if (err_text) *err_text = err.str();
  return code;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("sgdinfer_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("flags override the config file") {
  const fs::path dir = scratch("precedence");
  std::ofstream(dir / "linear_exp1.json") << R"({"generator": "linear_exp1", "eta": 0.02, "t": 100, "sims": 10})";
  const RunConfig cfg = parse({"coverage", "--config", (dir / "linear_exp1.json").string(), "--eta", "0.1", "--t",
                               "2500", "--sims", "500", "--seed", "42"});
  CHECK(cfg.subcommand == "coverage");
  CHECK(cfg.params.at("eta").get<double>() == 0.1);
  CHECK(cfg.params.at("t").get<int>() == 2500);
  CHECK(cfg.params.at("sims").get<int>() == 500);
  CHECK(cfg.params.at("generator").get<std::string>() == "linear_exp1");
  CHECK(cfg.params.at("seed").get<std::uint64_t>() == 42);
}

TEST_CASE("usage errors") {
  CHECK_THROWS_WITH(parse({"coverage", "--eta", "0.1"}), Catch::Matchers::ContainsSubstring("seed"));

  const fs::path dir = scratch("unknown");
  std::ofstream(dir / "c.json") << R"({"etta": 0.1, "seed": 1})";
  CHECK_THROWS_WITH(parse({"coverage", "--config", (dir / "c.json").string()}),
                    Catch::Matchers::ContainsSubstring("etta"));
  CHECK_THROWS_AS(parse({"coverage", "--seed", "x1"}), UsageError);
  CHECK_THROWS_AS(parse({"nosuch", "--seed", "1"}), UsageError);
  CHECK_THROWS_AS(parse({"trend", "--seed", "1", "--eta", "0.1"}), UsageError);

  std::string err;
  CHECK(main_with({"fit", "--seed", "1", "--generator", "linear_exp1", "--input", "a.csv"}, &err) == 2);
  CHECK(err.find("error[usage]") != std::string::npos);
  CHECK(main_with({"coverage", "--seed", "1", "--eta", "-0.5", "--out", scratch("neg").string()}) == 2);
}

TEST_CASE("coverage writes a report with coverage and width") {
  const fs::path dir = scratch("coverage");
  REQUIRE(main_with({"coverage", "--generator", "normal_mean", "--eta", "0.5", "--t", "5", "--d", "5", "--b", "20",
                     "--r", "50", "--batch", "2", "--sims", "20", "--seed", "3", "--out", dir.string()}) == 0);
  const auto report = nlohmann::json::parse(slurp(dir / "report.json"));
  CHECK(report.at("config").at("eta").get<double>() == 0.5);
  const auto& r = report.at("reports").at(0);
  CHECK(r.contains("coverage"));
  CHECK(r.contains("width"));
  CHECK(r.at("method") == "sgd_inference");
}

TEST_CASE("outputs are byte-identical across parallelism") {
  std::string first;
  for (const char* threads : {"1", "3"}) {
    const fs::path dir = scratch(std::string("parallel") + threads);
    REQUIRE(main_with({"univariate", "--generator", "exponential", "--sims", "12", "--seed", "8", "--parallel",
                       threads, "--out", dir.string()}) == 0);
    const std::string text = slurp(dir / "report.json");
    if (first.empty()) first = text;
    else CHECK(text == first);
  }
}

TEST_CASE("qq, trend, covariance, predict and fit outputs") {
  const fs::path dir = scratch("outputs");
  REQUIRE(main_with({"qq", "--generator", "linear_exp1", "--t", "100", "--r", "40", "--b", "500", "--coord", "2",
                     "--seed", "4", "--out", dir.string()}) == 0);
  std::ifstream qq(dir / "qq.csv");
  std::string line;
  std::getline(qq, line);
  CHECK(line.rfind("# config: ", 0) == 0);
  std::getline(qq, line);
  CHECK(line == "theoretical,sample");
  int rows = 0;
  while (std::getline(qq, line)) {
    CHECK(std::count(line.begin(), line.end(), ',') == 1);
    ++rows;
  }
  CHECK(rows == 40);

  REQUIRE(main_with({"trend", "--n", "30", "--p", "1", "--etas", "0.4,0.2", "--ts", "10,20", "--runs", "50",
                     "--seed", "5", "--out", dir.string()}) == 0);
  const std::string trend = slurp(dir / "trend.csv");
  CHECK(trend.find("eta,t,error\n0.40000000000000002,10,") != std::string::npos);
  CHECK(trend.find("\n0.20000000000000001,20,") != std::string::npos);

  REQUIRE(main_with({"covariance", "--generator", "linear_exp1", "--t", "100", "--r", "30", "--replicates", "20",
                     "--seed", "6", "--out", dir.string()}) == 0);
  for (const char* f : {"covariance.csv", "covariance_bootstrap.csv", "covariance_sandwich.csv",
                        "covariance_inverse_fisher.csv", "covariance_diagonal.csv"}) {
    CHECK(fs::exists(dir / f));
  }

  std::ofstream(dir / "points.csv") << "a,b\n1,0\n0,1\n";
  std::ofstream(dir / "data.csv") << "a,b,y\n1,0,1\n0,1,2\n1,1,3.5\n2,1,4\n1,2,5.2\n3,0,3\n";
  REQUIRE(main_with({"predict", "--input", (dir / "data.csv").string(), "--family", "linear", "--points",
                     (dir / "points.csv").string(), "--t", "50", "--r", "30", "--b", "100", "--eta", "0.05",
                     "--batch", "1", "--seed", "7", "--out", dir.string()}) == 0);
  const std::string pred = slurp(dir / "predict.csv");
  CHECK(std::count(pred.begin(), pred.end(), '\n') == 4);

  REQUIRE(main_with({"fit", "--input", (dir / "data.csv").string(), "--family", "linear", "--seed", "1", "--out",
                     dir.string()}) == 0);
  const auto fit = nlohmann::json::parse(slurp(dir / "fit.json"));
  CHECK(fit.at("theta_hat").size() == 2);
}

TEST_CASE("method failures exit with code one") {
  const fs::path dir = scratch("diverge");
  std::string err;
  CHECK(main_with({"coverage", "--generator", "linear_exp1", "--eta", "50", "--t", "10", "--r", "5", "--b", "10",
                   "--sims", "4", "--seed", "1", "--out", dir.string()},
                  &err) == 1);
  CHECK(err.find("error[method]") != std::string::npos);
}
