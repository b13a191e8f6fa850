#include "cdrp/dyson.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cdrp/nonint.hpp"
#include "cdrp/numerics.hpp"
#include "cdrp/paths.hpp"
#include "cdrp/stats.hpp"

namespace cdrp {

double dbm_entrance(double t, double y1, double y2) {
  if (!(t > 0.0)) throw std::domain_error("dbm_entrance: t must be > 0");
  if (y1 <= y2) return 0.0;
  const double d = y1 - y2;
  return d * d / t * heat_kernel(y1, t) * heat_kernel(y2, t);
}

double dbm_entrance_marginal(double t, double y, int coordinate) {
  if (!(t > 0.0)) throw std::domain_error("dbm_entrance_marginal: t must be > 0");
  if (coordinate != 1 && coordinate != 2) throw std::domain_error("dbm_entrance_marginal: coordinate is 1 or 2");
  const double root = std::sqrt(t);
  const double z = (coordinate == 1 ? y : -y) / root;
  const double phi = heat_kernel(z, 1.0);
  return phi * ((z * z + 1.0) * normal_cdf(z) + z * phi) / root;
}

std::function<double(double, double)> dbm_transition(double s, double t, double x1, double x2) {
  if (!(0.0 < s && s < t)) throw std::domain_error("dbm_transition: requires 0 < s < t");
  if (!(x1 > x2)) throw std::domain_error("dbm_transition: requires x1 > x2");
  return [=](double y1, double y2) {
    if (y1 <= y2) return 0.0;
    return (y1 - y2) / (x1 - x2) * det2_heat(x1, x2, y1, y2, t - s);
  };
}

PairPath sample_dbm(const Grid& grid, RandomStream& rng) {
  if (grid.origin() != 0.0) throw std::domain_error("sample_dbm: grid must start at 0");
  const double r2 = std::numbers::sqrt2;
  const Path b = sample_brownian_motion(grid, 0.0, 1.0, rng);
  const Path r = sample_bessel3(grid, 1.0, rng);
  Eigen::VectorXd upper = (b.values + r.values) / r2;
  Eigen::VectorXd lower = (b.values - r.values) / r2;
  upper[0] = lower[0] = 0.0;
  return PairPath(grid, std::move(upper), std::move(lower), 1.0);
}

ExperimentReport verify_diffusive_limit(const DiffusiveLimitOptions& o, const SeedSpec& seed) {
  if (o.n < 100) throw std::domain_error("verify_diffusive_limit: requires n >= 100");
  if (!(o.bound >= 1.0)) throw std::domain_error("verify_diffusive_limit: bound must be >= 1");
  if (o.length < 1.0 / o.bound || o.length > o.bound) {
    throw std::domain_error("verify_diffusive_limit: length must lie in [1/M, M]");
  }
  if (!(std::abs(o.z1) < 1.0 / o.bound && std::abs(o.z2) < 1.0 / o.bound)) {
    throw std::domain_error("verify_diffusive_limit: endpoints must satisfy |z| < 1/M");
  }
  if (!(o.z1 > o.z2)) throw std::domain_error("verify_diffusive_limit: requires z1 > z2");
  if (o.probe_times.empty() || o.samples < 2) throw std::domain_error("verify_diffusive_limit: nothing to probe");

  std::vector<double> times{0.0};
  for (double p : o.probe_times) {
    if (!(p > 0.0) || p / o.n >= o.length) throw std::domain_error("verify_diffusive_limit: probe outside bridge");
    times.push_back(p / o.n);
  }
  times.push_back(o.length);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  const Grid grid(Eigen::Map<const Eigen::VectorXd>(times.data(), static_cast<Eigen::Index>(times.size())));

  const std::size_t probes = o.probe_times.size();
  std::vector<std::vector<double>> up(probes), low(probes), bes(probes);
  const double root = std::sqrt(static_cast<double>(o.n));
  for (int k = 0; k < o.samples; ++k) {
    RandomStream rng(seed.child(k));
    const PairPath v = sample_nibb(grid, o.z1, o.z2, rng);
    const Path r = sample_bessel_bridge(grid, o.z1 - o.z2, 1.0, rng);
    for (std::size_t p = 0; p < probes; ++p) {
      const Eigen::Index i = grid.find(o.probe_times[p] / o.n);
      up[p].push_back(root * v.upper[i]);
      low[p].push_back(root * v.lower[i]);
      bes[p].push_back(root * r.values[i]);
    }
  }

  ExperimentReport rep;
  rep.experiment = "diffusive_limit";
  rep.seed = seed;
  rep.params = Json{{"n", o.n},         {"length", o.length},   {"z1", o.z1},
                    {"z2", o.z2},       {"bound", o.bound},     {"probe_times", o.probe_times},
                    {"samples", o.samples}, {"tolerance", o.tolerance}};
  Json probes_json = Json::array();
  for (std::size_t p = 0; p < probes; ++p) {
    const double t = o.probe_times[p];
    const double spread = 10.0 * std::sqrt(t);
    const auto m1 = stats::TabulatedCdf::from_density(
        [t](double y) { return dbm_entrance_marginal(t, y, 1); }, -spread, spread);
    const auto m2 = stats::TabulatedCdf::from_density(
        [t](double y) { return dbm_entrance_marginal(t, y, 2); }, -spread, spread);
    const auto mb = stats::TabulatedCdf::from_density([t](double y) { return bessel3_density(t, y); }, 0.0,
                                                      spread);
    const double w_up = stats::wasserstein1(up[p], m1);
    const double w_low = stats::wasserstein1(low[p], m2);
    const double w_bes = stats::wasserstein1(bes[p], mb);
    const bool ok = w_up < o.tolerance && w_low < o.tolerance && w_bes < o.tolerance;
    rep.pass = rep.pass && ok;
    probes_json.push_back(Json{{"time", t},
                               {"w1_upper", w_up},
                               {"w1_lower", w_low},
                               {"w1_bessel", w_bes},
                               {"pass", ok}});
  }
  rep.statistics["probes"] = probes_json;
  return rep;
}

ExperimentReport besselwd_check(const BesselTailOptions& o, const SeedSpec& seed) {
  if (o.horizons.size() < 2 || !std::is_sorted(o.horizons.begin(), o.horizons.end()) ||
      !(o.horizons.front() > 0.0)) {
    throw std::domain_error("besselwd_check: needs >= 2 increasing positive horizons");
  }
  if (!(o.step > 0.0) || o.samples < 1) throw std::domain_error("besselwd_check: bad step or samples");
  const double horizon = o.horizons.back();
  const auto intervals = static_cast<Eigen::Index>(std::ceil(horizon / o.step));
  const Grid grid = Grid::uniform(0.0, horizon, intervals);

  const std::size_t h = o.horizons.size();
  std::vector<std::vector<double>> integrals(h);
  bool positive = true;
  bool monotone = true;
  for (int k = 0; k < o.samples; ++k) {
    RandomStream rng(seed.child(k));
    const Path r = sample_bessel3(grid, o.sigma, rng);
    double acc = 0.0;
    std::size_t next = 0;
    for (Eigen::Index i = 1; i < grid.size() && next < h; ++i) {
      const double a = grid[i - 1];
      const double b = grid[i];
      const double fa = std::exp(-r.values[i - 1]);
      const double fb = std::exp(-r.values[i]);
      while (next < h && o.horizons[next] <= b) {
        const double c = o.horizons[next];
        const double fc = fa + (fb - fa) * (c - a) / (b - a);
        integrals[next].push_back(acc + 0.5 * (fa + fc) * (c - a));
        ++next;
      }
      acc += 0.5 * (fa + fb) * (b - a);
    }
    for (std::size_t j = 0; j < h; ++j) {
      positive = positive && integrals[j].back() > 0.0;
      if (j > 0) monotone = monotone && integrals[j].back() >= integrals[j - 1].back();
    }
  }

  ExperimentReport rep;
  rep.experiment = "bessel_tail_integral";
  rep.seed = seed;
  rep.params = Json{{"sigma", o.sigma}, {"horizons", o.horizons}, {"step", o.step},
                    {"samples", o.samples}, {"tolerance", o.tolerance}};
  Json gaps = Json::array();
  double last_gap = 0.0;
  for (std::size_t j = 1; j < h; ++j) {
    std::vector<double> d;
    for (int k = 0; k < o.samples; ++k) d.push_back(std::abs(integrals[j][k] - integrals[j - 1][k]));
    last_gap = stats::median(d);
    gaps.push_back(Json{{"from", o.horizons[j - 1]}, {"to", o.horizons[j]}, {"median_gap", last_gap}});
  }
  rep.statistics["gaps"] = gaps;
  rep.statistics["median_integral"] = stats::median(integrals.back());
  rep.statistics["all_positive"] = positive;
  rep.statistics["monotone_in_horizon"] = monotone;
  rep.pass = positive && monotone && last_gap < o.tolerance;
  return rep;
}

}  // namespace cdrp
