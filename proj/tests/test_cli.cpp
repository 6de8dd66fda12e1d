#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "kclf/builtin.hpp"
#include "kclf/cli.hpp"
#include "kclf/config.hpp"
#include "kclf/report.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "koopman-clf");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = kclf::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() /
          ("kclf_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }

  std::string path(const std::string& name) const { return (dir / name).string(); }

  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(path(name)) << text;
    return path(name);
  }

  static std::string read(const std::string& p) {
    std::ifstream in(p);
    return {std::istreambuf_iterator<char>(in), {}};
  }

  fs::path dir;
};

}  // namespace

TEST_F(Cli, ConfigRoundTrip) {
  const Result r = run({"example2", "--mu", "3", "--degree", "10"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto cfg = kclf::parse_config(r.out);
  EXPECT_EQ(cfg.n, 2);
  EXPECT_EQ(cfg.truncation_degree, 10);
  EXPECT_EQ(cfg.scheme.kind, kclf::SchemeKind::diagonal_dominance);
  const auto again = kclf::parse_config(kclf::config_to_json(cfg));
  EXPECT_TRUE(kclf::equivalent(cfg, again));
  EXPECT_EQ(kclf::config_to_json(again), r.out);
}

TEST_F(Cli, EquivalenceIgnoresOrder) {
  const std::string a = R"({"n":1,"subsystems":[{"coefficients":[
    {"component":1,"exponents":[1],"value":{"re":-1,"im":0}},
    {"component":1,"exponents":[2],"value":{"re":0.5,"im":0}}]}]})";
  const std::string b = R"({"n":1,"subsystems":[{"coefficients":[
    {"component":1,"exponents":[2],"value":{"re":0.5,"im":0}},
    {"component":1,"exponents":[1],"value":{"re":-1,"im":0}}]}]})";
  const std::string c = R"({"n":1,"subsystems":[{"coefficients":[
    {"component":1,"exponents":[1],"value":{"re":-1,"im":0}},
    {"component":1,"exponents":[2],"value":{"re":0.25,"im":0}}]}]})";
  EXPECT_TRUE(kclf::equivalent(kclf::parse_config(a), kclf::parse_config(b)));
  EXPECT_FALSE(kclf::equivalent(kclf::parse_config(a), kclf::parse_config(c)));
}

TEST_F(Cli, ConfigRejectsBadInput) {
  EXPECT_THROW(kclf::parse_config(R"({"n":1,"subsystems":[{"coefficients":[
    {"component":1,"exponents":[0],"value":{"re":1,"im":0}}]}]})"),
               kclf::ConfigError);
  EXPECT_THROW(kclf::parse_config(R"({"n":1,"bogus":2,"subsystems":[]})"), kclf::ConfigError);
  EXPECT_THROW(kclf::parse_config("{not json"), kclf::ConfigError);
  const std::string bad = write("bad.json", "{");
  EXPECT_EQ(run({"analyze", "--config", bad}).code, kclf::exit_code::bad_input);
  EXPECT_EQ(run({"analyze", "--config", path("missing.json")}).code, kclf::exit_code::bad_input);
}

TEST_F(Cli, AnalyzeExitCodes) {
  const std::string ex1 = path("ex1.json");
  ASSERT_EQ(run({"example1", "--a", "1", "--b", "0.3", "--out", ex1}).code, 0);
  const Result ok = run({"analyze", "--config", ex1});
  ASSERT_EQ(ok.code, kclf::exit_code::ok) << ok.err;
  const json rep = json::parse(ok.out);
  EXPECT_EQ(rep["status"], "certified");
  EXPECT_EQ(rep["rho_certified"].get<double>(), 1.0);
  EXPECT_NEAR(rep["q"]["sup_computed"].get<double>(), 0.7425, 1e-10);

  const std::string ex1b = path("ex1b.json");
  ASSERT_EQ(run({"example1", "--a", "1", "--b", "0.5", "--out", ex1b}).code, 0);
  const Result fail = run({"analyze", "--config", ex1b});
  EXPECT_EQ(fail.code, kclf::exit_code::scheme_failed);
  EXPECT_EQ(json::parse(fail.out)["status"], "scheme_failed");

  const auto sl2 = kclf::config_from_family(kclf::sl2_family(), 6, kclf::SchemeKind::polynomial);
  const std::string p = write("sl2.json", kclf::config_to_json(sl2));
  EXPECT_EQ(run({"analyze", "--config", p}).code, kclf::exit_code::unsolvable);

  const auto near = kclf::config_from_family(kclf::example1_family(1.0, 0.3308), 12,
                                             kclf::SchemeKind::polynomial);
  const std::string q = write("near.json", kclf::config_to_json(near));
  EXPECT_EQ(run({"analyze", "--config", q, "--rho", "1"}).code, kclf::exit_code::divergent);
  EXPECT_EQ(run({"analyze", "--config", q}).code, kclf::exit_code::ok);
}

TEST_F(Cli, AnalyzeCsv) {
  const std::string ex1 = path("ex1.json");
  ASSERT_EQ(run({"example1", "--out", ex1, "--degree", "4"}).code, 0);
  const Result r = run({"analyze", "--config", ex1, "--format", "csv"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "index,alpha,degree,epsilon");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 14);  // monomials of degree 1..4 in two variables
}

TEST_F(Cli, ExampleTwoAnalyze) {
  const std::string ex2 = path("ex2.json");
  ASSERT_EQ(run({"example2", "--mu", "3", "--degree", "14", "--out", ex2}).code, 0);
  const Result r = run({"analyze", "--config", ex2});
  ASSERT_EQ(r.code, 0) << r.err;
  const double rho = json::parse(r.out)["rho_certified"].get<double>();
  EXPECT_LE(rho, oracle::example2_rho(3.0) + 1e-6);
  EXPECT_GE(rho, 0.95 * oracle::example2_rho(3.0));
}

TEST_F(Cli, Deterministic) {
  const std::string ex1 = path("ex1.json");
  ASSERT_EQ(run({"example1", "--out", ex1}).code, 0);
  const Result a = run({"analyze", "--config", ex1});
  const Result b = run({"analyze", "--config", ex1});
  EXPECT_EQ(a.out, b.out);
  const Result s1 = run({"selftest"});
  const Result s2 = run({"selftest"});
  EXPECT_EQ(s1.out, s2.out);
}

TEST_F(Cli, FigureRho) {
  const Result r = run({"figure-rho"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "mu,rho_closed_form");
  std::vector<std::pair<double, double>> rows;
  while (std::getline(in, line)) {
    const auto c = line.find(',');
    rows.emplace_back(std::stod(line.substr(0, c)), std::stod(line.substr(c + 1)));
  }
  ASSERT_EQ(rows.size(), 100u);
  EXPECT_EQ(rows.front().first, 2.4);
  EXPECT_EQ(rows.back().first, 12.0);
  EXPECT_NEAR(rows.front().second, 0.50198, 1e-5);
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_GT(rows[i].second, rows[i - 1].second);
  for (const auto& [mu, rho] : rows) EXPECT_NEAR(rho, oracle::example2_rho(mu), 1e-15);
}

TEST_F(Cli, FigureRhoCertified) {
  const Result r = run({"figure-rho", "--steps", "3", "--certify", "--degree", "12"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "mu,rho_closed_form,rho_certified");
  double prev = 0;
  int rows = 0;
  while (std::getline(in, line)) {
    const double cert = std::stod(line.substr(line.rfind(',') + 1));
    EXPECT_GT(cert, prev);
    prev = cert;
    ++rows;
  }
  EXPECT_EQ(rows, 3);
}

TEST_F(Cli, FigureRhoRejectsSmallMu) {
  const Result r = run({"figure-rho", "--mu-min", "2"});
  EXPECT_EQ(r.code, kclf::exit_code::usage);
  EXPECT_NE(r.err.find("12/5"), std::string::npos);
}

TEST_F(Cli, SimulatePassAndNegativeControl) {
  const auto cfg = kclf::config_from_family(kclf::linear_coupled_family(0.9), 8,
                                            kclf::SchemeKind::polynomial);
  const std::string c = write("lc.json", kclf::config_to_json(cfg));
  const std::string rep = path("lc_report.json");
  ASSERT_EQ(run({"analyze", "--config", c, "--out", rep}).code, 0);
  const std::vector<std::string> quick = {"--trials", "2", "--points", "6", "--dt", "0.01"};
  auto args = std::vector<std::string>{"simulate", "--config", c, "--report", rep};
  args.insert(args.end(), quick.begin(), quick.end());
  const Result ok = run(args);
  ASSERT_EQ(ok.code, 0) << ok.err;
  EXPECT_TRUE(json::parse(ok.out)["passed"].get<bool>());

  json report = json::parse(read(rep));
  report["epsilon"][1]["value"] = report["epsilon"][1]["value"].get<double>() * 0.1;
  write("lc_report.json", report.dump(2));
  EXPECT_EQ(run(args).code, kclf::exit_code::audit_failed);
}

TEST_F(Cli, SimulateUsageErrors) {
  const std::string ex1 = path("ex1.json");
  ASSERT_EQ(run({"example1", "--out", ex1}).code, 0);
  EXPECT_EQ(run({"simulate", "--config", ex1, "--trials", "0"}).code, kclf::exit_code::usage);
  EXPECT_EQ(run({"analyze"}).code, kclf::exit_code::usage);
  EXPECT_EQ(run({"nonsense"}).code, kclf::exit_code::usage);
}

TEST_F(Cli, Selftest) {
  const Result ok = run({"selftest"});
  EXPECT_EQ(ok.code, 0);
  EXPECT_NE(ok.out.find("selftest: PASS"), std::string::npos);
  const Result bad = run({"selftest", "--inject-fault", "entry-sign"});
  EXPECT_EQ(bad.code, kclf::exit_code::property_failure);
  EXPECT_NE(bad.out.find("selftest: FAIL"), std::string::npos);
}
