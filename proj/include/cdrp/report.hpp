#pragma once

#include <json.hpp>
#include <string>

#include "cdrp/rng.hpp"
#include "cdrp/stats.hpp"

namespace cdrp {

using Json = nlohmann::ordered_json;

/// Parameters, seed and statistics of one experiment. Serialized as
/// {experiment, params, seed, statistics, pass}.
struct ExperimentReport {
  std::string experiment;
  Json params = Json::object();
  SeedSpec seed;
  Json statistics = Json::object();
  bool pass = true;

  Json to_json() const;
};

Json to_json(const stats::TestResult& r);
Json to_json(const SeedSpec& s);

}  // namespace cdrp
