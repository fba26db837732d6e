#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "friedrichs_cli/cli.hpp"

namespace fs = std::filesystem;
using friedrichs::cli::run;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result lab(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("friedrichs_cli_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json result_of(const Result& r) { return nlohmann::json::parse(r.out).at("result"); }

}  // namespace

TEST(Cli, EigLinearCase) {
  const Result r = lab({"eig", "--domain", "interval:0,1", "--p", "2", "--q", "2", "--n", "256"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = result_of(r);
  EXPECT_NEAR(j.at("lambda1").get<double>(), 9.8696044, 0.005 * 9.87);
  EXPECT_NEAR(j.at("closed_form").get<double>(), 9.8696044010893586, 1e-12);
  EXPECT_TRUE(j.at("diagnostics").at("converged").get<bool>());
  EXPECT_FALSE(j.at("diagnostics").contains("wall_seconds"));
}

TEST(Cli, OracleBlockAndResolvedConfig) {
  const Result r = lab({"eig", "--p", "3", "--q", "2", "--oracle", "shooting"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto doc = nlohmann::json::parse(r.out);
  const auto& x = doc.at("result").at("cross_validation");
  EXPECT_LT(x.at("relative_difference").get<double>(), 0.01);
  const auto& c = doc.at("config");
  for (const char* key : {"domain", "p", "q", "n", "seed", "tolerance", "batch", "lspec", "gammas", "t_nodes", "out"}) {
    EXPECT_TRUE(c.contains(key)) << key;
  }
  EXPECT_EQ(c.at("oracle"), "shooting");
  EXPECT_EQ(c.at("n"), 128);
  EXPECT_EQ(lab({"eig", "--domain", "rect:0,1,0,1", "--n", "8", "--oracle", "shooting"}).code, 1);
}

TEST(Cli, ConfigFileAndParseErrors) {
  const fs::path dir = scratch("config");
  fs::create_directories(dir);
  std::ofstream(dir / "ok.json") << R"({"p": 3, "q": 2, "n": 32, "mu1": true})";
  const Result ok = lab({"eig", "--config", (dir / "ok.json").string(), "--n", "48"});
  ASSERT_EQ(ok.code, 0) << ok.err;
  const auto doc = nlohmann::json::parse(ok.out);
  EXPECT_EQ(doc.at("config").at("n"), 48);  // flag wins over the file
  EXPECT_TRUE(doc.at("result").contains("mu1"));

  std::ofstream(dir / "bad.json") << "{\n  \"p\": 3,\n  \"q\": 2,,\n}";
  const Result bad = lab({"eig", "--config", (dir / "bad.json").string()});
  EXPECT_EQ(bad.code, 1);
  EXPECT_NE(bad.err.find("bad.json:3:"), std::string::npos) << bad.err;

  std::ofstream(dir / "unknown.json") << R"({"pp": 3})";
  EXPECT_EQ(lab({"eig", "--config", (dir / "unknown.json").string()}).code, 1);
  EXPECT_EQ(lab({"eig", "--config", (dir / "missing.json").string()}).code, 1);
  EXPECT_EQ(lab({"eig", "-p", "3"}).code, 1);  // long flags only
  EXPECT_EQ(lab({"frobnicate"}).code, 1);
  EXPECT_EQ(lab({"eig", "--domain", "disk:0,1"}).code, 1);
  EXPECT_EQ(lab({"eig", "--p", "2", "--q", "3"}).code, 1);
  EXPECT_EQ(lab({"eig", "--n", "1"}).code, 1);
}

TEST(Cli, NoConvergenceExitCode) {
  EXPECT_EQ(lab({"eig", "--n", "64", "--tolerance", "1e-30"}).code, 2);
}

TEST(Cli, VerifyCsvDeterministic) {
  const fs::path a = scratch("verify");
  const std::vector<std::string> args = {"verify", "--ineq", "improved-1.9", "--batch", "1000", "--seed", "7",
                                         "--out", a.string()};
  const Result r1 = lab(args);
  ASSERT_EQ(r1.code, 0) << r1.err;
  const std::string csv1 = slurp(a / "improved-1.9.csv");
  const std::string json1 = slurp(a / "improved-1.9.json");
  EXPECT_EQ(std::count(csv1.begin(), csv1.end(), '\n'), 1001);
  const auto summary = nlohmann::json::parse(json1);
  EXPECT_GT(summary.at("result").at("min_ratio").get<double>(), 0.0);
  EXPECT_EQ(summary.at("config").at("lspec"), "phi-power:1");
  EXPECT_FALSE(summary.dump().find("timestamp") != std::string::npos);
  EXPECT_TRUE(nlohmann::json::parse(slurp(a / "metadata.json")).contains("timestamp"));
  ASSERT_EQ(lab(args).code, 0);
  EXPECT_EQ(slurp(a / "improved-1.9.csv"), csv1);
  EXPECT_EQ(slurp(a / "improved-1.9.json"), json1);
  EXPECT_EQ(slurp(a / "config.json"), nlohmann::json::parse(json1).at("config").dump(2) + "\n");
}

TEST(Cli, VerifyErrors) {
  const Result empty = lab({"verify", "--ineq", "friedrichs", "--batch", "0"});
  EXPECT_EQ(empty.code, 1);
  EXPECT_NE(empty.err.find("empty-batch"), std::string::npos) << empty.err;
  EXPECT_EQ(lab({"verify", "--ineq", "no-such-id", "--batch", "4"}).code, 1);
  EXPECT_EQ(lab({"verify", "--ineq", "hidden-1.17", "--batch", "4"}).code, 1);  // needs p = q
  EXPECT_EQ(lab({"verify", "--ineq", "generalized-1.14", "--lspec", "density:x", "--batch", "4"}).code, 1);
}

TEST(Cli, VerifyAllIds) {
  for (const char* id : {"friedrichs", "generalized-1.14", "hidden-1.15", "hidden-sigma-path", "Ml-equivalence",
                         "P1-lower-bound"}) {
    const Result r = lab({"verify", "--ineq", id, "--batch", "60", "--n", "48", "--p", "3", "--q", "3", "--lspec",
                          "phi-power:2", "--lspec2", "phi-power:1"});
    EXPECT_EQ(r.code, 0) << id << ": " << r.err;
  }
  const Result dens = lab({"verify", "--ineq", "generalized-1.14", "--lspec", "density:3", "--batch", "60"});
  EXPECT_EQ(dens.code, 0) << dens.err;
}

TEST(Cli, ConstantRunsAdversarialByDefault) {
  const Result r = lab({"constant", "--ineq", "improved-1.9", "--batch", "100", "--n", "64"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto doc = nlohmann::json::parse(r.out);
  EXPECT_EQ(doc.at("config").at("adversarial"), 50);
  EXPECT_GT(doc.at("result").at("constant").get<double>(), 0.0);
}

TEST(Cli, HiddenSuite) {
  const Result r = lab({"hidden", "--p", "3", "--q", "3", "--batch", "200"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = result_of(r);
  EXPECT_EQ(j.at("reports").size(), 4u);
  EXPECT_GE(j.at("reports")[2].at("worst_scaled_gap_with_c17").get<double>(), -1e-9);
  EXPECT_EQ(result_of(lab({"hidden", "--batch", "20", "--n", "32"})).at("reports").size(), 2u);
}

TEST(Cli, Separation) {
  const Result r = lab({"separation", "--gammas", "0.5,0.2,0.1,0.05"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = result_of(r);
  EXPECT_GT(j.at("Lambda_gamma").at("gap").get<double>(), 0.0);
  EXPECT_EQ(j.at("Lambda_tilde").size(), 4u);
  EXPECT_EQ(lab({"separation", "--separation", "sideways"}).code, 1);
}

TEST(Cli, SolveArtifactsAndErrors) {
  const fs::path a = scratch("solve");
  const std::vector<std::string> args = {"solve", "--forcing", "random:5", "--out", a.string()};
  ASSERT_EQ(lab(args).code, 0);
  const auto doc = nlohmann::json::parse(slurp(a / "solve.json"));
  EXPECT_LT(doc.at("result").at("energy").get<double>(), 0.0);
  EXPECT_LE(doc.at("result").at("residual").get<double>(), 1e-9);
  const std::string u1 = slurp(a / "u.json");
  const std::string s1 = slurp(a / "solve.json");
  ASSERT_EQ(lab(args).code, 0);
  EXPECT_EQ(slurp(a / "u.json"), u1);
  EXPECT_EQ(slurp(a / "solve.json"), s1);

  const Result b = lab({"solve", "--forcing", "file:" + (a / "u.json").string()});
  EXPECT_EQ(b.code, 0) << b.err;

  const Result pq = lab({"solve", "--p", "3", "--q", "3", "--forcing", "random:5"});
  EXPECT_EQ(pq.code, 1);
  EXPECT_NE(pq.err.find("p > q"), std::string::npos);
  EXPECT_EQ(lab({"solve"}).code, 1);
  EXPECT_EQ(lab({"solve", "--forcing", "random:"}).code, 1);
}

TEST(Cli, DomainParsing) {
  using friedrichs::cli::parse_domain;
  const auto s = parse_domain("rect:0,2,-1,1", 8, 0);
  EXPECT_EQ(s.dim, 2);
  EXPECT_EQ(s.cells[1], 8);
  EXPECT_EQ(parse_domain("rect:0,2,-1,1", 8, 4).cells[1], 4);
  EXPECT_EQ(parse_domain("interval:-1,3", 10, 0).corners[1], 3.0);
  EXPECT_THROW(parse_domain("interval:0", 10, 0), std::exception);
  EXPECT_THROW(parse_domain("interval:0,x", 10, 0), std::exception);
}
