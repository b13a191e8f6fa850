#include "cdrp/report.hpp"

namespace cdrp {

Json to_json(const SeedSpec& s) {
  return Json{{"master_seed", s.master_seed}, {"stream_id", s.stream_id}};
}

Json to_json(const stats::TestResult& r) {
  Json j{{"statistic", r.statistic}};
  j["p_value"] = r.p_value ? Json(*r.p_value) : Json(nullptr);
  j["n1"] = r.n1;
  j["n2"] = r.n2;
  return j;
}

Json ExperimentReport::to_json() const {
  return Json{{"experiment", experiment},
              {"params", params},
              {"seed", cdrp::to_json(seed)},
              {"statistics", statistics},
              {"pass", pass}};
}

}  // namespace cdrp
