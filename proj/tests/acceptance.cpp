#include "greedy_opt/acceptance.hpp"
#include "greedy_opt/experiment.hpp"

#include <filesystem>
#include <iostream>

int main() {
  greedy_opt::AcceptanceOptions options;
  options.threads = greedy_opt::thread_budget();
  options.scratch = std::filesystem::temp_directory_path() / "greedy_opt_acceptance";
  std::filesystem::remove_all(options.scratch);

  int failed = 0;
  for (const auto& r : greedy_opt::run_acceptance(options)) {
    std::cout << greedy_opt::format_result(r) << std::endl;
    if (!r.passed) ++failed;
  }
  std::cout << (failed ? "acceptance: FAIL" : "acceptance: PASS") << " (" << failed << " failing)" << std::endl;
  return failed ? 1 : 0;
}
