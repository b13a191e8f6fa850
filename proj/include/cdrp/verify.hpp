#pragma once

#include <map>
#include <string>
#include <vector>

#include "cdrp/report.hpp"
#include "cdrp/rng.hpp"

namespace cdrp::verify {

/// One acceptance check. `statistic` is compared against `tolerance` with
/// `comparison`: "<", ">", "<=" (scalar tolerance) or "in" ([lo, hi]).
struct Check {
  std::string name;
  int criterion = 0;
  bool pass = false;
  double statistic = 0.0;
  std::string comparison;
  Json tolerance;
  double runtime_seconds = 0.0;
  SeedSpec seed;
  Json details = Json::object();

  Json to_json() const;
};

struct Options {
  SeedSpec seed;
  int threads = 1;
  /// Multiplies every Monte Carlo sample and replica count (for smoke runs).
  double sample_scale = 1.0;
  /// Replaces the scalar tolerance of the named checks.
  std::map<std::string, double> tolerances;
};

struct SuiteResult {
  std::string suite;
  Options options;
  std::vector<Check> checks;

  bool pass() const;
  Json to_json() const;
};

/// densities, decompositions, limits, polymer, all.
const std::vector<std::string>& suite_names();

/// Throws std::invalid_argument for an unknown suite.
SuiteResult run_suite(const std::string& suite, const Options& options);

}  // namespace cdrp::verify
