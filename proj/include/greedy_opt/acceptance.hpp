#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace greedy_opt {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct AcceptanceOptions {
  std::uint64_t seed = 1;
  std::size_t threads = 1;
  std::filesystem::path scratch = "acceptance_scratch";  // determinism runs write here
};

/// All eleven acceptance criteria, in order.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options);

/// The CSV/JSON artifacts of the representative selftest runs.
void write_selftest_outputs(std::uint64_t seed, const std::filesystem::path& dir, std::size_t threads = 1);

/// "criterion N: PASS|FAIL  name  (detail, seconds)"
std::string format_result(const CriterionResult& r);

}  // namespace greedy_opt
