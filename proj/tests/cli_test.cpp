#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "pfolio/pipeline.hpp"
#include "pfolio/scenario.hpp"
#include "testutil.hpp"

namespace fs = std::filesystem;
using namespace pfolio;

namespace {

const char* cli_path() {
  const char* env = std::getenv("PFOLIO_CLI");
  return env != nullptr ? env : PFOLIO_CLI_PATH;
}

struct RunOutput {
  int exit_code = -1;
  std::string stdout_text;
  std::string stderr_text;
};

RunOutput run_cli(const std::string& args, const std::string& stdin_file = "") {
  static int counter = 0;
  fs::path out = fs::temp_directory_path() /
                 ("pfolio_cli_out_" + std::to_string(counter));
  fs::path err = fs::temp_directory_path() /
                 ("pfolio_cli_err_" + std::to_string(counter));
  ++counter;
  std::string command = std::string(cli_path()) + " " + args;
  if (!stdin_file.empty()) command += " < " + stdin_file;
  command += " > " + out.string() + " 2> " + err.string();
  int status = std::system(command.c_str());
  RunOutput result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  result.stdout_text = slurp(out);
  result.stderr_text = slurp(err);
  fs::remove(out);
  fs::remove(err);
  return result;
}

// A temp directory holding a small clustered scenario.
struct ScenarioFixture {
  fs::path dir;

  ScenarioFixture() {
    dir = fs::temp_directory_path() / "pfolio_cli_scenario";
    fs::remove_all(dir);
    Scenario s = test::make_clustered_scenario({
        .clusters = 3,
        .per_cluster = 6,
        .cutoff = 600,
        .others_timeout = true,
        .extra_noise_features = 0,
        .seed = 51,
    });
    save_scenario(s, dir);
  }
  ~ScenarioFixture() { fs::remove_all(dir); }
};

}  // namespace

TEST_CASE("train writes a loadable model and prints a summary") {
  ScenarioFixture fixture;
  fs::path model = fs::temp_directory_path() / "pfolio_cli_model.model";
  auto r = run_cli("train --scenario " + fixture.dir.string() +
                   " --approach threes --out " + model.string());
  CHECK(r.exit_code == 0);
  CHECK(fs::exists(model));
  CHECK(r.stdout_text.find("backup:") != std::string::npos);
  CHECK(r.stdout_text.find("pre-solving schedule") != std::string::npos);

  SUBCASE("aspeed summary shows a schedule and no selector") {
    fs::path aspeed_model = fs::temp_directory_path() / "pfolio_aspeed.model";
    auto a = run_cli("train --scenario " + fixture.dir.string() +
                     " --approach aspeed --out " + aspeed_model.string());
    CHECK(a.exit_code == 0);
    CHECK(a.stdout_text.find("schedule only") != std::string::npos);
    CHECK(a.stdout_text.find("(empty)") == std::string::npos);

    auto plan = run_cli("select --model " + aspeed_model.string());
    CHECK(plan.exit_code == 0);
    CHECK(plan.stdout_text.find("presolve") != std::string::npos);
    fs::remove(aspeed_model);
  }
  SUBCASE("select prints the plan and applies the removal rule") {
    // Features near cluster 1's center select alg1.
    auto plan = run_cli("select --model " + model.string() +
                        " --features 100,0,0 --format csv");
    CHECK(plan.exit_code == 0);
    CHECK(plan.stdout_text.find("selected,alg1") != std::string::npos);
    // The selected algorithm never appears as a presolver.
    CHECK(plan.stdout_text.find("presolve,alg1") == std::string::npos);
  }
  SUBCASE("the selected schedule component is dropped from the plan") {
    // Hand-built solver: the selector always picks A, and A also holds a
    // schedule slot; the printed plan keeps only B's component.
    TrainedPortfolioSolver solver;
    solver.cutoff = 600.0;
    solver.model.spec = approach_spec(Approach::measp);
    solver.model.spec.normalization = NormalizationKind::none;
    solver.model.normalization.kind = NormalizationKind::none;
    solver.model.imputation.fill = {0.0};
    solver.model.algorithms = {"A", "B"};
    NeighborState state;
    state.k = 1;
    state.features = Matrix(1, 1);
    state.par10 = Matrix(1, 2);
    state.par10.at(0, 0) = 1.0;
    state.par10.at(0, 1) = 100.0;
    solver.model.state = std::move(state);
    solver.schedule.components = {{0, 5.0}, {1, 3.0}};
    fs::path crafted = fs::temp_directory_path() / "pfolio_cli_crafted.model";
    save_solver(solver, crafted);

    auto plan = run_cli("select --model " + crafted.string() +
                        " --features 0 --format csv");
    CHECK(plan.exit_code == 0);
    CHECK(plan.stdout_text.find("presolve,B,3.000") != std::string::npos);
    CHECK(plan.stdout_text.find("presolve,A") == std::string::npos);
    CHECK(plan.stdout_text.find("selected,A,597.000") != std::string::npos);
    fs::remove(crafted);
  }
  SUBCASE("an empty feature row falls back to the backup") {
    auto plan = run_cli("select --model " + model.string() + " --features ''");
    CHECK(plan.exit_code == 0);
    CHECK(plan.stdout_text.find("backup:") != std::string::npos);
  }
  SUBCASE("a feature row of the wrong length is a usage error") {
    auto plan = run_cli("select --model " + model.string() + " --features 1,2");
    CHECK(plan.exit_code == 2);
  }
  fs::remove(model);
}

TEST_CASE("invalid approach ids exit with code 2 and list the options") {
  ScenarioFixture fixture;
  auto r = run_cli("train --scenario " + fixture.dir.string() +
                   " --approach bogus --out /tmp/unused.model");
  CHECK(r.exit_code == 2);
  CHECK(r.stderr_text.find("valid approaches") != std::string::npos);
  CHECK(r.stderr_text.find("satzilla11") != std::string::npos);
}

TEST_CASE("features subcommand") {
  fs::path program = fs::temp_directory_path() / "pfolio_cli_prog.lp";
  {
    std::ofstream out(program);
    out << "1 2 1 0 3\n1 3 1 0 2\n0\n2 a\n3 b\n0\nB+\n0\nB-\n0\n1\n";
  }
  SUBCASE("from a file") {
    auto r = run_cli("features " + program.string());
    CHECK(r.exit_code == 0);
    CHECK(r.stdout_text.find("instance,tight,") == 0);
    CHECK(r.stdout_text.find("pfolio_cli_prog,0,") != std::string::npos);
  }
  SUBCASE("from standard input") {
    auto r = run_cli("features --stdin --instance demo", program.string());
    CHECK(r.exit_code == 0);
    CHECK(r.stdout_text.find("demo,0,") != std::string::npos);
  }
  SUBCASE("malformed input exits with 2 and a line number") {
    fs::path bad = fs::temp_directory_path() / "pfolio_cli_bad.lp";
    {
      std::ofstream out(bad);
      out << "1 2 0 0\n7 1 0\n";
    }
    auto r = run_cli("features " + bad.string());
    CHECK(r.exit_code == 2);
    CHECK(r.stderr_text.find(":2:") != std::string::npos);
    fs::remove(bad);
  }
  fs::remove(program);
}

TEST_CASE("evaluate writes reports") {
  ScenarioFixture fixture;
  fs::path prefix = fs::temp_directory_path() / "pfolio_cli_report";
  auto count_rows = [&] {
    std::ifstream in(prefix.string() + ".summary.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "approach,timeouts,par10,par1,significant_best");
    std::size_t rows = 0;
    for (std::string line; std::getline(in, line);) {
      if (!line.empty()) ++rows;
    }
    return rows;
  };

  SUBCASE("two approaches plus the two baselines") {
    auto r = run_cli("evaluate --scenario " + fixture.dir.string() +
                     " --approach measp --approach aspeed --folds 3 --out " +
                     prefix.string());
    CHECK(r.exit_code == 0);
    CHECK(fs::exists(prefix.string() + ".pvalues.csv"));
    CHECK(count_rows() == 4);
  }
  SUBCASE("all seven approaches by default") {
    auto r = run_cli("evaluate --scenario " + fixture.dir.string() +
                     " --folds 3 --out " + prefix.string());
    CHECK(r.exit_code == 0);
    CHECK(count_rows() == 9);  // 7 approaches + vbs + single_best
  }
  SUBCASE("grid overrides apply") {
    auto r = run_cli("evaluate --scenario " + fixture.dir.string() +
                     " --approach threes --folds 3 --grid k=1:5 --out " +
                     prefix.string());
    CHECK(r.exit_code == 0);
    CHECK(count_rows() == 3);
  }
  fs::remove(prefix.string() + ".summary.csv");
  fs::remove(prefix.string() + ".pvalues.csv");
}
