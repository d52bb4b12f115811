#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "polymixed/polymesh.hpp"

namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(POLYMIXED_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path temp_path(const std::string& name) { return fs::temp_directory_path() / ("polymixed_cli_" + name); }

}  // namespace

TEST(Cli, InvalidRangeIsConfigError) { EXPECT_EQ(run_cli("--levels 5..2"), 2); }

TEST(Cli, MismatchedCaseIsConfigError) { EXPECT_EQ(run_cli("--grid wedge --case trig2d"), 2); }

TEST(Cli, UnknownFlagIsConfigError) { EXPECT_EQ(run_cli("--frobnicate"), 2); }

TEST(Cli, UnknownGridIsConfigError) { EXPECT_EQ(run_cli("--grid hex"), 2); }

TEST(Cli, HelpExitsCleanly) { EXPECT_EQ(run_cli("--help"), 0); }

TEST(Cli, StudyWritesDeterministicCsv) {
  const fs::path a = temp_path("a.csv"), b = temp_path("b.csv");
  ASSERT_EQ(run_cli("--grid quad --k 0 --levels 2..4 --format csv --out " + a.string()), 0);
  ASSERT_EQ(run_cli("--grid quad --k 0 --levels 2..4 --format csv --out " + b.string()), 0);
  const std::string ta = slurp(a);
  EXPECT_EQ(ta, slurp(b));
  EXPECT_EQ(ta.substr(0, ta.find('\n')), "level,err_u,rate_u,err_q_V,rate_q");
  EXPECT_EQ(std::count(ta.begin(), ta.end(), '\n'), 4);
  fs::remove(a);
  fs::remove(b);
}

TEST(Cli, ChecksPassOnCoarseStudy) { EXPECT_EQ(run_cli("--grid quadhex --k 1 --levels 1..2 --checks"), 0); }

TEST(Cli, DumpMeshRoundTrips) {
  const fs::path p = temp_path("mesh.txt");
  ASSERT_EQ(run_cli("--grid wedge --levels 1..2 --dump-mesh " + p.string()), 0);
  const polymixed::PolytopalMesh m = polymixed::mesh_read(p);
  EXPECT_TRUE(m == polymixed::make_wedge_grid(2));
  fs::remove(p);
}

TEST(Cli, InexactQuadratureIsNumericalFailure) {
  setenv("POLYMIXED_QUAD_DEGREE", "0", 1);
  const int code = run_cli("--k 1 --levels 1..1");
  unsetenv("POLYMIXED_QUAD_DEGREE");
  EXPECT_EQ(code, 3);
}

TEST(Cli, MalformedQuadratureOverrideIsConfigError) {
  setenv("POLYMIXED_QUAD_DEGREE", "x", 1);
  const int code = run_cli("--levels 1..1");
  unsetenv("POLYMIXED_QUAD_DEGREE");
  EXPECT_EQ(code, 2);
}
