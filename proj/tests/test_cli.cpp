#include "support.hpp"

#include "../tools/cli.hpp"

#include "aptforge/error.hpp"
#include "aptforge/io.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace aptforge;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "aptforge_cli_tests";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST(Io, RoundTrip) {
  const Mdp m = random_mdp(21, 3, 2);
  const auto adm = random_admissible(21, 3, 2);
  const auto doc = parse_mdp_json(mdp_to_json(m, &adm));
  ASSERT_TRUE(doc.admissible.has_value());
  EXPECT_EQ(*doc.admissible, adm);
  EXPECT_EQ(doc.mdp.base_reward(), m.base_reward());
  EXPECT_EQ(doc.mdp.gamma(), m.gamma());
  for (int a = 0; a < 2; ++a) EXPECT_EQ(doc.mdp.transitions(a), m.transitions(a));
}

TEST(Io, RejectsMalformed) {
  EXPECT_THROW(parse_mdp_json("{\"n_states\": 1"), Error);
  EXPECT_THROW(parse_mdp_json(R"({"n_states": 1, "n_actions": 1, "gamma": 0.9, "sigma": [1], "P": [[[0.5]]], "R": [[0]]})"),
               ValidationError);
  EXPECT_THROW(parse_mdp_json(R"({"n_states": 2, "n_actions": 1, "gamma": 0.9, "sigma": [1], "P": [[[1]]], "R": [[0]]})"),
               Error);
}

TEST(Io, OutcomeJsonFields) {
  const Mdp m = aptforge::test::b2();
  const auto o = design(m, AdmissibleSet::all(1, 2), Strategy::opt_adm, 1.0, 0.1);
  const auto j = nlohmann::json::parse(outcome_to_json(o));
  for (const char* key : {"policy", "cost", "score", "objective", "phi"}) EXPECT_TRUE(j.contains(key)) << key;
}

TEST(Cli, DesignOnBundledEnv) {
  const auto r = run({"design", "--env", "cliff", "--strategy", "opt-adm"});
  EXPECT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_EQ(r.out.rfind("opt-adm ", 0), 0u) << r.out;
}

TEST(Cli, DesignIsDeterministic) {
  const auto a = scratch("a.json");
  const auto b = scratch("b.json");
  ASSERT_EQ(run({"design", "--env", "grass_mud", "--out", a.string()}).code, 0);
  ASSERT_EQ(run({"design", "--env", "grass_mud", "--out", b.string()}).code, 0);
  const auto text = slurp(a);
  EXPECT_FALSE(text.empty());
  EXPECT_EQ(text, slurp(b));
  const auto j = nlohmann::json::parse(text);
  EXPECT_TRUE(j.contains("outcome"));
  EXPECT_TRUE(j.contains("bounds"));
}

TEST(Cli, MalformedMdpExitsWithInputError) {
  const auto p = scratch("bad.json");
  std::ofstream(p) << "{ not json";
  const auto r = run({"design", "--mdp", p.string()});
  EXPECT_EQ(r.code, cli::kExitInput);
  EXPECT_NE(r.err.find("error"), std::string::npos);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, cli::kExitInput);
  EXPECT_EQ(run({"design"}).code, cli::kExitInput);
  EXPECT_EQ(run({"design", "--env", "nowhere"}).code, cli::kExitInput);
  EXPECT_EQ(run({"design", "--env", "cliff", "--strategy", "nope"}).code, cli::kExitInput);
  EXPECT_EQ(run({"design", "--env", "cliff", "--gamma", "1.5"}).code, cli::kExitInput);
  EXPECT_EQ(run({"sweep", "--env", "cliff"}).code, cli::kExitInput);
  EXPECT_EQ(run({"sweep", "--env", "cliff", "--sweep-lambda", "0:1"}).code, cli::kExitInput);
  EXPECT_EQ(run({"design", "--env", "cliff", "--strategy", "special"}).code, cli::kExitInput);
}

TEST(Cli, SweepSinglePoint) {
  const auto r = run({"sweep", "--env", "cliff", "--sweep-epsilon", "0.1:0.1:1"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, cli::kCsvHeader);
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++rows;
    EXPECT_EQ(line.rfind("cliff,", 0), 0u);
  }
  EXPECT_EQ(rows, 4);
}

TEST(Cli, SweepLambdaGrid) {
  const auto p = scratch("sweep.csv");
  ASSERT_EQ(run({"sweep", "--env", "cliff", "--sweep-lambda", "0:2:3", "--out", p.string()}).code, 0);
  std::istringstream in(slurp(p));
  std::string line;
  int rows = -1;
  while (std::getline(in, line)) rows += line.empty() ? 0 : 1;
  EXPECT_EQ(rows, 12);
}

TEST(Cli, GenerateAndSolve) {
  const auto p = scratch("gen.json");
  ASSERT_EQ(run({"generate", "random", "--states", "3", "--actions", "2", "--seed", "4", "--out", p.string()}).code, 0);
  const auto first = slurp(p);
  ASSERT_EQ(run({"generate", "random", "--states", "3", "--actions", "2", "--seed", "4", "--out", p.string()}).code, 0);
  EXPECT_EQ(first, slurp(p));
  const auto r = run({"design", "--mdp", p.string(), "--strategy", "qgreedy"});
  EXPECT_EQ(r.code, 0) << r.err;
  const auto sp = scratch("special.json");
  ASSERT_EQ(run({"generate", "random", "--special", "--states", "3", "--actions", "3", "--out", sp.string()}).code, 0);
  EXPECT_EQ(run({"design", "--mdp", sp.string(), "--strategy", "special"}).code, 0);
  const auto grid = scratch("grid.json");
  ASSERT_EQ(run({"generate", "action_hacking", "--out", grid.string()}).code, 0);
  EXPECT_TRUE(parse_mdp_json(slurp(grid)).admissible.has_value());
}

TEST(Cli, HelpExitsCleanly) {
  const auto r = run({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("design"), std::string::npos);
}
