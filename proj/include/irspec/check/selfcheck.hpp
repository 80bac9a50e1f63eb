#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace irspec::check {

enum class Relation { at_most, at_least, equals, greater_than };

/// One measured quantity compared against a pinned threshold.
struct CheckResult {
  std::string criterion;  // group the measurement belongs to
  std::string name;
  double measured = 0.0;
  Relation relation = Relation::at_most;
  double threshold = 0.0;
  bool passed = false;
};

struct CheckOptions {
  std::uint64_t seed = 20240521;
  std::size_t pr_images = 100;
  // Negative control: reconstruct with a perturbed low-pass kernel.
  bool corrupt_kernel = false;
};

CheckResult make_result(std::string criterion, std::string name, double measured, Relation relation,
                        double threshold);

std::vector<CheckResult> check_contourlet_reconstruction(const CheckOptions& opt);
std::vector<CheckResult> check_dft_oracle(const CheckOptions& opt);
std::vector<CheckResult> check_spectral_fidelity(const CheckOptions& opt);
std::vector<CheckResult> check_metric_sanity(const CheckOptions& opt);
std::vector<CheckResult> check_attention_invariants(const CheckOptions& opt);
std::vector<CheckResult> check_prompt_algebra(const CheckOptions& opt);
std::vector<CheckResult> check_energy_concentration(const CheckOptions& opt);

/// Every library-level acceptance criterion, in a fixed order.
std::vector<CheckResult> run_all_checks(const CheckOptions& opt);

/// "PASS <criterion> / <name>: measured <= threshold" lines, 17-digit numbers.
void print_results(std::ostream& os, const std::vector<CheckResult>& results);

bool all_passed(const std::vector<CheckResult>& results);

}  // namespace irspec::check
