// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "irspec/check/selfcheck.hpp"

namespace fs = std::filesystem;
using irspec::check::CheckResult;

namespace {

struct CommandResult {
  int exit_code = -1;
  std::string output;
};

CommandResult run(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string("\"") + IRSPEC_CLI_PATH + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  CommandResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  r.output = ss.str();
  return r;
}

// Value after "key: " on its own line, or NaN.
double field(const std::string& text, const std::string& key) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind(key + ": ", 0) == 0) {
      const std::string v = line.substr(key.size() + 2);
      return v == "inf" ? INFINITY : std::strtod(v.c_str(), nullptr);
    }
  }
  return NAN;
}

std::vector<CheckResult> cli_round_trip() {
  const char* crit = "cli round trip";
  const fs::path dir = fs::temp_directory_path() / "irspec_acceptance";
  fs::create_directories(dir);
  const std::string stock = std::string(IRSPEC_TEST_DATA) + "/stock_64.pgm";
  const std::string coeffs = (dir / "stock.crg").string();
  const std::string rebuilt = (dir / "stock_rebuilt.pgm").string();

  const auto dec = run("decompose \"" + stock + "\" \"" + coeffs + "\" --levels 4 --dirs 3,3,3,3", dir / "dec.log");
  const auto rec =
      run("reconstruct \"" + coeffs + "\" \"" + rebuilt + "\" --reference \"" + stock + "\"", dir / "rec.log");
  const double psnr = dec.exit_code == 0 && rec.exit_code == 0 ? field(rec.output, "psnr") : NAN;
  const auto self = run("selfcheck", dir / "selfcheck.log");

  using irspec::check::make_result;
  using irspec::check::Relation;
  return {make_result(crit, "decompose then reconstruct stock 64x64, psnr vs original file (dB)", psnr,
                      Relation::at_least, 48.0),
          make_result(crit, "selfcheck exit code", self.exit_code, Relation::equals, 0.0)};
}

}  // namespace

int main() {
  std::vector<CheckResult> results = irspec::check::run_all_checks({});
  for (auto& r : cli_round_trip()) results.push_back(std::move(r));

  std::cout << "-- measurements --\n";
  irspec::check::print_results(std::cout, results);

  std::vector<std::string> order;
  std::map<std::string, bool> verdict;
  for (const auto& r : results) {
    if (!verdict.count(r.criterion)) {
      order.push_back(r.criterion);
      verdict[r.criterion] = true;
    }
    verdict[r.criterion] = verdict[r.criterion] && r.passed;
  }

  std::cout << "-- criteria --\n";
  bool all = true;
  for (const auto& c : order) {
    std::cout << (verdict[c] ? "PASS " : "FAIL ") << c << '\n';
    all = all && verdict[c];
  }
  std::cout << (all ? "acceptance: all criteria passed" : "acceptance: FAILED") << '\n';
  return all ? 0 : 1;
}
