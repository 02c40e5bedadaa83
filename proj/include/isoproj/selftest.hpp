#pragma once

// The acceptance suite: every criterion recomputed from a seed, with the
// expected values taken from closed forms or quadrature, never from the code
// under test.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

namespace isoproj {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool checks_pass = false;
  double runtime_seconds = 0.0;
  double budget_seconds = 0.0;
  nlohmann::json detail = nlohmann::json::object();

  bool within_budget() const { return runtime_seconds < budget_seconds; }
  bool pass() const { return checks_pass && within_budget(); }
};

struct SelftestResult {
  std::uint64_t seed = 0;
  std::vector<CriterionResult> criteria;
  /// Experiment reports behind criteria 7-10, keyed by name.
  nlohmann::json reports = nlohmann::json::object();

  bool passed() const;
  /// Timing lives under "timing" keys and "runtime_seconds" so strip_timing
  /// leaves only the reproducible part.
  nlohmann::json to_json() const;
};

using CriterionCallback = std::function<void(const CriterionResult&)>;

/// Criteria 1-10. `on_result` sees each criterion as it finishes.
SelftestResult run_selftest(std::uint64_t seed, unsigned threads,
                            const CriterionCallback& on_result = {});

/// Criterion 11: compares two selftest documents after strip_timing.
CriterionResult reproducibility_criterion(const nlohmann::json& first, const nlohmann::json& second,
                                          unsigned first_threads, unsigned second_threads,
                                          double seconds);

/// Criteria 1-10 at `first_threads`, then the whole suite again at
/// `second_threads` for criterion 11. The result carries the first run's
/// reports.
SelftestResult run_acceptance(std::uint64_t seed, unsigned first_threads, unsigned second_threads,
                              const CriterionCallback& on_result = {});

/// One-line summary "[PASS] 3 name (12.3 s / 120 s) detail".
std::string format_line(const CriterionResult& r);

inline constexpr std::uint64_t kDefaultSelftestSeed = 20240611;

}  // namespace isoproj
