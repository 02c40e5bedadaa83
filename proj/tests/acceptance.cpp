// Runs every acceptance criterion and prints one pass/fail line each.
// Usage: acceptance [seed] [report.json]

#include <fstream>
#include <iostream>
#include <string>

#include "isoproj/selftest.hpp"

int main(int argc, char** argv) {
  const std::uint64_t seed = argc > 1 ? std::stoull(argv[1]) : isoproj::kDefaultSelftestSeed;
  std::cout << "acceptance suite, seed " << seed << std::endl;
  const isoproj::SelftestResult result = isoproj::run_acceptance(
      seed, 1, 2, [](const isoproj::CriterionResult& r) { std::cout << isoproj::format_line(r) << std::endl; });
  if (argc > 2) {
    std::ofstream out(argv[2]);
    out << result.to_json().dump(2) << "\n";
  }
  std::size_t passed = 0;
  for (const auto& c : result.criteria) passed += c.pass() ? 1 : 0;
  std::cout << passed << "/" << result.criteria.size() << " criteria passed" << std::endl;
  return result.passed() ? 0 : 1;
}
