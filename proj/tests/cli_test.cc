#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <json.hpp>

namespace {

namespace fs = std::filesystem;

struct Result {
  int code = -1;
  std::string out;
};

Result Cli(const std::string& args) {
  std::string cmd = std::string(VRCG_CLI) + " " + args + " 2>/dev/null";
  Result r;
  FILE* p = popen(cmd.c_str(), "r");
  if (p == nullptr) return r;
  char buf[4096];
  size_t n;
  while ((n = fread(buf, 1, sizeof(buf), p)) > 0) r.out.append(buf, n);
  int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("vrcg_cli_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string Path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

TEST_F(CliTest, GenerateIsDeterministic) {
  ASSERT_EQ(Cli("generate --seed 3 --users 40 --out " + Path("a.json")).code, 0);
  ASSERT_EQ(Cli("generate --seed 3 --users 40 --out " + Path("b.json")).code, 0);
  std::string a = Slurp(Path("a.json"));
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, Slurp(Path("b.json")));
  EXPECT_EQ(Cli("generate --seed 3 --users 40").out, a);
}

TEST_F(CliTest, RunIsDeterministicInBothFormats) {
  for (const char* fmt : {"csv", "json"}) {
    std::string base = std::string("run --seed 2 --users 80 --timesteps 3 ") +
                       "--methods vexa,gepar,single_path,amps,rr --format " + fmt;
    ASSERT_EQ(Cli(base + " --out " + Path("a")).code, 0);
    ASSERT_EQ(Cli(base + " --out " + Path("b")).code, 0);
    EXPECT_EQ(Slurp(Path("a")), Slurp(Path("b"))) << fmt;
  }
  std::string csv = Cli("run --seed 2 --users 80 --methods vexa").out;
  EXPECT_EQ(csv.rfind("timestep,method,total_qoe,", 0), 0u);
}

TEST_F(CliTest, RunFromScenarioFileMatchesFlags) {
  ASSERT_EQ(Cli("generate --seed 5 --users 50 --out " + Path("s.json")).code, 0);
  Result a = Cli("run --scenario " + Path("s.json") + " --methods vexa,gepar");
  Result b = Cli("run --seed 5 --users 50 --methods vexa,gepar");
  EXPECT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
}

TEST_F(CliTest, VerifyAcceptsRunOutputAndRejectsTampering) {
  ASSERT_EQ(Cli("generate --seed 4 --users 60 --out " + Path("s.json")).code, 0);
  ASSERT_EQ(Cli("run --scenario " + Path("s.json") +
                " --timesteps 2 --methods vexa,gepar,amps --solutions " +
                Path("sol.json") + " --out " + Path("m.csv"))
                .code,
            0);
  Result ok = Cli("verify --scenario " + Path("s.json") + " --solution " + Path("sol.json"));
  EXPECT_EQ(ok.code, 0);
  EXPECT_EQ(ok.out, "vexa: ok\ngepar: ok\namps: ok\n");

  nlohmann::json j = nlohmann::json::parse(Slurp(Path("sol.json")));
  for (auto& u : j["solutions"][0]["stage1"]) {
    if (u["admitted"].get<bool>()) {
      u["legs"][0]["prbs"] = 1000;
      break;
    }
  }
  std::ofstream(Path("bad.json")) << j.dump();
  Result bad = Cli("verify --scenario " + Path("s.json") + " --solution " + Path("bad.json"));
  EXPECT_EQ(bad.code, 1);
  EXPECT_NE(bad.out.find("bs_capacity"), std::string::npos);
}

TEST_F(CliTest, CompareProducesGapTable) {
  ASSERT_EQ(Cli("run --seed 1 --users 50 --methods vexa,gepar --out " + Path("a.csv")).code, 0);
  ASSERT_EQ(Cli("run --seed 1 --users 50 --methods vexa,gepar --format json --out " +
                Path("b.json"))
                .code,
            0);
  Result r = Cli("compare " + Path("a.csv") + " " + Path("b.json"));
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind("timestep,method,metric,a,b,difference,relative_gap\n", 0), 0u);
  EXPECT_NE(r.out.find("0,gepar,cost_total,"), std::string::npos);
}

TEST_F(CliTest, ConfigErrorsExitTwo) {
  EXPECT_EQ(Cli("run --methods nonsense").code, 2);
  EXPECT_EQ(Cli("run --format xml").code, 2);
  EXPECT_EQ(Cli("run --no-such-flag").code, 2);
  EXPECT_EQ(Cli("").code, 2);
  EXPECT_EQ(Cli("run --scenario " + Path("missing.json")).code, 2);

  ASSERT_EQ(Cli("generate --users 5 --out " + Path("s.json")).code, 0);
  nlohmann::json j = nlohmann::json::parse(Slurp(Path("s.json")));
  j["radio"]["epsilon"] = 1.0;
  std::ofstream(Path("eps.json")) << j.dump();
  EXPECT_EQ(Cli("run --scenario " + Path("eps.json")).code, 2);
  // The exhaustive solvers refuse large instances.
  EXPECT_EQ(Cli("run --users 40 --methods oracle_stage1").code, 2);
  EXPECT_EQ(Cli("--help").code, 0);
}

TEST_F(CliTest, InfeasibleExitsOne) {
  Result r = Cli("run --users 2 --bs 1 --cns 1 --cn-capacity-scale 1e-9 "
                 "--methods oracle_stage2");
  EXPECT_EQ(r.code, 1);
}

}  // namespace
