// Acceptance battery: one pass/fail line per criterion; nonzero exit on any
// failure.  Criterion numbers can be passed as arguments to run a subset.

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "rwrslab/experiments.hpp"

int main(int argc, char** argv) {
  std::vector<int> subset;
  for (int i = 1; i < argc; ++i) subset.push_back(std::atoi(argv[i]));
  const auto outcomes = rwrslab::run_acceptance(subset, 0, std::cout);
  int failures = 0;
  for (const auto& outcome : outcomes)
    if (!outcome.pass) ++failures;
  std::cout << (failures == 0 ? "acceptance: all criteria passed"
                              : "acceptance: " + std::to_string(failures) +
                                    " criteria failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
