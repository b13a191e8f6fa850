#pragma once

#include <functional>
#include <vector>

#include "cdrp/path.hpp"
#include "cdrp/report.hpp"
#include "cdrp/rng.hpp"

namespace cdrp {

/// Entrance law of 2-level Dyson Brownian motion started at (0, 0):
/// 1{y1 > y2} ((y1 - y2)^2 / t) p_t(y1) p_t(y2).
double dbm_entrance(double t, double y1, double y2);

/// Marginal density of the upper (coordinate 1) or lower (coordinate 2)
/// particle under the entrance law at time t.
double dbm_entrance_marginal(double t, double y, int coordinate);

/// Transition density from (x1, x2) at s to time t:
/// 1{y1 > y2} ((y1 - y2) / (x1 - x2)) det(p_{t-s}(x_i - y_j)).
std::function<double(double, double)> dbm_transition(double s, double t, double x1, double x2);

/// Dyson Brownian motion from (0, 0): upper = (B + R) / sqrt 2 and
/// lower = (B - R) / sqrt 2, with B a standard Brownian motion and R an
/// independent standard Bessel(3) process. The grid must start at 0.
PairPath sample_dbm(const Grid& grid, RandomStream& rng);

/// Two independent one-sided samples glued at time 0. The negative side is
/// stored in forward time: negative(x) is the value at -x.
template <typename Sample>
struct TwoSided {
  Sample negative;
  Sample positive;
};

/// Samples both sides on a uniform grid over [0, T] with `intervals` steps.
/// The sides use the streams seed.child(0) and seed.child(1).
template <typename Sampler>
auto sample_two_sided(Sampler&& sampler, double T, Eigen::Index intervals, const SeedSpec& seed) {
  if (!(T > 0.0)) throw std::domain_error("sample_two_sided: requires T > 0");
  const Grid grid = Grid::uniform(0.0, T, intervals);
  RandomStream left(seed.child(0));
  RandomStream right(seed.child(1));
  auto neg = sampler(grid, left);
  auto pos = sampler(grid, right);
  return TwoSided<decltype(neg)>{std::move(neg), std::move(pos)};
}

struct DiffusiveLimitOptions {
  int n = 400;
  double length = 1.0;  // bridge length L
  double z1 = 0.25;
  double z2 = -0.25;
  double bound = 2.0;  // the constant M of the hypotheses: L in [1/M, M], |z| < 1/M
  std::vector<double> probe_times{1.0};
  int samples = 50000;
  double tolerance = 0.05;
};

/// Samples non-intersecting bridges of length L ending at (z1, z2), rescales
/// them to sqrt(n) V(t / n) and compares each coordinate at every probe time
/// with the Dyson entrance law by Wasserstein-1. Also compares sqrt(n) R(t / n)
/// for a Bessel bridge of length L ending at z1 - z2 with the Bessel(3) law.
ExperimentReport verify_diffusive_limit(const DiffusiveLimitOptions& options, const SeedSpec& seed);

struct BesselTailOptions {
  double sigma = 2.0;
  std::vector<double> horizons{50.0, 100.0};
  double step = 0.01;
  int samples = 1000;
  double tolerance = 1e-3;
};

/// Per-sample trapezoid estimates of the integral of exp(-R_sigma) over [0, T]
/// for each horizon; reports the median gap between successive horizons.
ExperimentReport besselwd_check(const BesselTailOptions& options, const SeedSpec& seed);

}  // namespace cdrp
