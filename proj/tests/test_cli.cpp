#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string output;
};

const fs::path& work_dir() {
  static const fs::path dir = [] {
    fs::path p = fs::temp_directory_path() / ("memfem_cli_" + std::to_string(::getpid()));
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

// Run the installed binary with `args`, capturing interleaved stdout+stderr.
RunResult run_cli(const std::string& args) {
  static int counter = 0;
  const fs::path capture = work_dir() / ("out_" + std::to_string(counter++) + ".txt");
  const std::string cmd =
      std::string("\"") + CLI_BINARY_PATH + "\" " + args + " > \"" + capture.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream f(capture);
  std::ostringstream ss;
  ss << f.rdbuf();
  r.output = ss.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("bad invocations exit with the usage code") {
  CHECK(run_cli("run --M 3 --T 0.25").exit_code == 2);          // odd mesh
  CHECK(run_cli("--mode bogus").exit_code == 2);                // unknown mode
  CHECK(run_cli("--not-a-flag").exit_code == 2);                // parse error
  CHECK(run_cli("run --order 3").exit_code == 2);               // bad order
  CHECK(run_cli("run --dt-rule adaptive").exit_code == 2);      // unsupported rule
  CHECK(run_cli("convergence --dt 0.1 --Ms 4,8").exit_code == 2);
  CHECK(run_cli("run --tol 0").exit_code == 2);
  CHECK(run_cli("run --max-iter 0").exit_code == 2);
  CHECK(run_cli("run --jobs 0").exit_code == 2);
  CHECK(run_cli("run --mode check").exit_code == 2);            // conflicting modes
}

TEST_CASE("help exits cleanly") {
  const RunResult r = run_cli("--help");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("--mode") != std::string::npos);
  CHECK(r.output.find("--Ms") != std::string::npos);
}

TEST_CASE("check mode runs the verification suites") {
  const RunResult r = run_cli("check");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("PASS quadrature-exactness") != std::string::npos);
  CHECK(r.output.find("all checks passed") != std::string::npos);
  CHECK(r.output.find("FAIL") == std::string::npos);
  // Positional and flag spellings agree.
  CHECK(run_cli("--mode check").exit_code == 0);
}

TEST_CASE("run mode reports errors and writes a CSV") {
  const fs::path out = work_dir() / "run4";
  const RunResult r = run_cli("run --M 4 --T 0.25 --out \"" + out.string() + "\"");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("final-time L2 errors") != std::string::npos);
  CHECK(r.output.find("(rule: dt = h)") != std::string::npos);
  REQUIRE(fs::exists(out / "run_errors.csv"));
  const std::string csv = slurp(out / "run_errors.csv");
  CHECK(csv.rfind("M,h,", 0) == 0);
  CHECK(csv.find("\n4,") != std::string::npos);

  // An explicit step size is honored and labeled.
  const RunResult rexp = run_cli("run --M 4 --T 0.25 --dt 0.05 --out \"" + out.string() + "\"");
  CHECK(rexp.exit_code == 0);
  CHECK(rexp.output.find("(explicit)") != std::string::npos);
  CHECK(rexp.output.find("steps 5") != std::string::npos);
}

TEST_CASE("convergence mode emits table, csv, markdown, and svg deterministically") {
  const fs::path out1 = work_dir() / "sweep1";
  const fs::path out2 = work_dir() / "sweep2";
  const std::string args = "convergence --Ms 4,8 --T 0.25 --out ";
  const RunResult r = run_cli(args + "\"" + out1.string() + "\"");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("| 1/h |") != std::string::npos);
  CHECK(r.output.find("M=8:") != std::string::npos);
  for (const char* name : {"convergence.csv", "convergence.md", "convergence.svg"})
    CHECK(fs::exists(out1 / name));

  const RunResult r2 = run_cli(args + "\"" + out2.string() + "\"");
  CHECK(r2.exit_code == 0);
  CHECK(slurp(out1 / "convergence.csv") == slurp(out2 / "convergence.csv"));
  CHECK(slurp(out1 / "convergence.svg") == slurp(out2 / "convergence.svg"));
}

TEST_CASE("JSON config files are honored and flags override them") {
  const fs::path out = work_dir() / "cfgrun";
  const fs::path cfg = work_dir() / "cfg.json";
  {
    std::ofstream f(cfg);
    f << "{\"mode\":\"run\",\"M\":4,\"T\":0.25,\"order\":1,"
         "\"out\":\"" << out.string() << "\","
         "\"kappa\":[2.0,2.0]}";
  }
  const RunResult r = run_cli("--config \"" + cfg.string() + "\"");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("memfem run") != std::string::npos);
  CHECK(r.output.find("T:            0.25") != std::string::npos);
  CHECK(r.output.find("(override)") != std::string::npos);  // kappa from the config
  CHECK(fs::exists(out / "run_errors.csv"));

  const RunResult rflag = run_cli("--config \"" + cfg.string() + "\" --T 0.5");
  CHECK(rflag.exit_code == 0);
  CHECK(rflag.output.find("T:            0.5") != std::string::npos);

  const fs::path bad = work_dir() / "bad.json";
  {
    std::ofstream f(bad);
    f << "{not json";
  }
  CHECK(run_cli("--config \"" + bad.string() + "\"").exit_code == 2);
  CHECK(run_cli("--config \"" + (work_dir() / "missing.json").string() + "\"").exit_code == 2);
}
