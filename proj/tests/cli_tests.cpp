// End-to-end tests of the command-line binary. argv[1] must be the path to
// the built CLI. Plain main: each check prints its own failure and the exit
// code is the number of failed checks.

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "opbm/golden.hpp"
#include "opbm/instance.hpp"

namespace fs = std::filesystem;

namespace {

int failures = 0;

void expect(bool ok, const std::string& what) {
  if (!ok) {
    ++failures;
    std::cerr << "FAIL: " << what << "\n";
  }
}

struct CommandResult {
  int exit_code = -1;
  std::string output;
};

CommandResult run_command(const std::string& cmd) {
  CommandResult r;
  std::string full = cmd + " 2>/dev/null";
  FILE* pipe = popen(full.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  while (std::size_t got = std::fread(buf, 1, sizeof(buf), pipe)) r.output.append(buf, got);
  int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

int count_lines(const std::string& s) {
  int n = 0;
  for (char c : s) {
    if (c == '\n') ++n;
  }
  return n;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: cli_tests <path-to-cli>\n";
    return 64;
  }
  const std::string cli = argv[1];
  const fs::path dir = fs::temp_directory_path() / "opbm_cli_tests";
  fs::create_directories(dir);
  const std::string example_path = (dir / "example.json").string();
  opbm::save_instance(opbm::golden_example().instance, example_path);

  {
    auto r = run_command(cli + " reproduce-example");
    expect(r.exit_code == 0, "reproduce-example exits 0");
    expect(r.output.find("tpp,8") != std::string::npos, "reproduce-example prints tpp,8");
    expect(r.output.find("dispatch_value,6") != std::string::npos,
           "reproduce-example prints dispatch_value,6");
    expect(r.output.find("opt_value,8") != std::string::npos,
           "reproduce-example prints opt_value,8");
    expect(r.output.find("result,PASS") != std::string::npos, "reproduce-example passes");
  }
  {
    auto r = run_command(cli + " reproduce-example --format json");
    expect(r.exit_code == 0, "reproduce-example json exits 0");
    expect(count_lines(r.output) == 5, "json mode emits exactly five trace lines");
    std::istringstream lines(r.output);
    std::string line;
    int t = 0;
    while (std::getline(lines, line)) {
      auto j = nlohmann::json::parse(line);
      expect(j["t"] == ++t, "trace line has sequential t");
    }
    expect(nlohmann::json::parse(r.output.substr(0, r.output.find('\n')))["preferred"] == 4,
           "first trace line prefers worker 4");
  }
  {
    auto r = run_command(cli + " solve --instance " + example_path + " --format json");
    expect(r.exit_code == 0, "solve exits 0");
    auto j = nlohmann::json::parse(r.output);
    expect(j["objective"] == 8.0, "solve reports objective 8");
    expect(j["flow_denominator"] == 10, "solve reports the shared denominator");
  }
  {
    auto r = run_command(cli + " solve --instance " + (dir / "missing.json").string());
    expect(r.exit_code == 2, "solve on a missing file exits 2");
  }
  {
    auto bad = dir / "bad.json";
    std::ofstream(bad) << R"({"n":1,"k":2,"denominator":1,"numerators":[1,1],)"
                       << R"("utilities":[[1.0,2.0]]})";
    auto r = run_command(cli + " solve --instance " + bad.string());
    expect(r.exit_code == 2, "solve on an invalid distribution exits 2");
  }
  {
    auto r = run_command(cli + " solve --gen-lb 2,1/2 --format json");
    expect(r.exit_code == 0, "solve lower-bound instance exits 0");
    auto j = nlohmann::json::parse(r.output);
    expect(j["objective"] == 1.0, "lower-bound n=2 p=1/2 has objective 1");
  }
  {
    auto out = (dir / "gen.json").string();
    auto r = run_command(cli + " gen --gen-lb 2,1/2 --out " + out);
    expect(r.exit_code == 0, "gen exits 0");
    auto g = opbm::load_instance(out);
    expect(g.k == 3 && g.numerators == std::vector<std::int64_t>{1, 1, 2},
           "gen writes the lower-bound instance");
  }
  {
    auto r = run_command(cli + " solve --instance " + example_path + " --gen-lb 2,1/2");
    expect(r.exit_code == 2, "two instance sources exit 2");
    auto r2 = run_command(cli + " solve");
    expect(r2.exit_code == 2, "no instance source exits 2");
  }
  {
    auto r = run_command(cli + " run --instance " + example_path +
                         " --sequence 3,1,2,2,3 --policy greedy --format json");
    expect(r.exit_code == 0, "run greedy exits 0");
    expect(count_lines(r.output) == 5, "run emits one event line per arrival");
  }
  {
    auto r = run_command(cli + " exact --gen-lb 3,3/4 --format json");
    expect(r.exit_code == 0, "exact exits 0");
    auto j = nlohmann::json::parse(r.output);
    expect(j["tpp"] == 2.25, "exact reports tpp 9/4");
    expect(j["dispatch_ge_half_tpp"] == true, "exact: dispatch >= tpp/2");
    expect(j["tpp_ge_opt"] == true, "exact: tpp >= opt");
    expect(j["dispatch_ge_half_opt"] == true, "exact: dispatch >= opt/2");
  }
  {
    auto r = run_command(cli + " exact --gen-lb 22,1/2");
    expect(r.exit_code == 3, "exact beyond the DP capacity exits 3");
  }
  {
    auto r = run_command(cli + " exact --instance " + example_path +
                         " --edge-probs --format json");
    expect(r.exit_code == 0, "exact --edge-probs exits 0");
    expect(r.output.find("edge_probabilities") != std::string::npos,
           "edge probability matrix is emitted on request");
  }
  {
    auto r = run_command(cli + " run --instance " + example_path +
                         " --policy dispatch --replication 3 --seed 21 --format json");
    expect(r.exit_code == 0, "run --replication exits 0");
    expect(count_lines(r.output) == 5, "replication replay emits one event per arrival");
  }
  {
    auto r = run_command(cli + " exact --instance " + example_path + " --rational");
    expect(r.exit_code == 0, "exact --rational exits 0");
    expect(r.output.find("availability_uniform,PASS") != std::string::npos,
           "rational route certifies the availability invariant");
  }
  {
    auto r = run_command(cli + " lemmas --instance " + example_path +
                         " --trials 20000 --seed 0");
    expect(r.exit_code == 0, "lemmas exits 0 when all checks pass");
    expect(count_lines(r.output) == 6, "lemmas emits header lines plus four check rows");
    expect(r.output.find("FAIL") == std::string::npos, "lemmas has no failing row");
  }
  {
    auto a = (dir / "sweep_a.csv").string();
    auto b = (dir / "sweep_b.csv").string();
    auto ra = run_command(cli + " lowerbound --n 12 --p 0.25,0.1 --trials 1500 --jobs 1 --out " + a);
    auto rb = run_command(cli + " lowerbound --n 12 --p 0.25,0.1 --trials 1500 --jobs 2 --out " + b);
    expect(ra.exit_code == 0 && rb.exit_code == 0, "lowerbound exits 0");
    expect(read_file(a) == read_file(b), "lowerbound output is byte-identical across --jobs");
    expect(count_lines(read_file(a)) == 4, "lowerbound emits one row per sweep cell");
  }
  {
    auto a = (dir / "sim_a.csv").string();
    auto b = (dir / "sim_b.csv").string();
    run_command(cli + " simulate --gen-random 6,3,5,6,1 --trials 4000 --seed 9 --jobs 1 --out " + a);
    run_command(cli + " simulate --gen-random 6,3,5,6,1 --trials 4000 --seed 9 --jobs 2 --out " + b);
    expect(read_file(a) == read_file(b), "simulate output is byte-identical across --jobs");
  }

  fs::remove_all(dir);
  if (failures == 0) {
    std::cout << "cli_tests: all checks passed\n";
  } else {
    std::cout << "cli_tests: " << failures << " checks failed\n";
  }
  return failures;
}
