#pragma once

#include <functional>
#include <vector>

#include "cdrp/path.hpp"
#include "cdrp/rng.hpp"

namespace cdrp {

/// Normalizer of the time-1 non-intersecting Brownian motion law,
/// the integral of (r1 - r2) p_1(r1) p_1(r2) over {r1 > r2}. Evaluated once by
/// 2D quadrature and cached.
double nibm_normalizer();

/// Mass that a pair started at (y1, y2), y1 > y2, keeps on {r1 > r2} after
/// time tau under the killed determinantal kernel:
/// the integral of det(p_tau(y_i - r_j)) over {r1 > r2}, equal to
/// erf((y1 - y2) / (2 sqrt(tau))). Zero when y1 <= y2.
double nonint_survival(double y1, double y2, double tau);

/// Joint density of (W1(1), W2(1)) for non-intersecting Brownian motions.
double nibm_density_t1(double y1, double y2);

/// Joint density of (W1(t), W2(t)), 0 < t <= 1.
double nibm_density(double t, double y1, double y2);

/// Transition density from (x1, x2) at time s to (y1, y2) at time t,
/// 0 < s < t <= 1 and x1 > x2.
std::function<double(double, double)> nibm_transition(double s, double t, double x1, double x2);

/// Marginal cdfs of the time-1 law (coordinate 1 is the upper path).
double nibm_t1_upper_cdf(double y);
double nibm_t1_lower_cdf(double y);

/// One-point density at 0 < t < 1 of a unit-length non-intersecting bridge
/// ending at (z1, z2), z1 > z2.
std::function<double(double, double)> nibb_one_point(double t, double z1, double z2);

/// Transition density of the same bridge from (x1, x2) at s to time t,
/// 0 < s < t < 1.
std::function<double(double, double)> nibb_transition(double s, double t, double x1, double x2,
                                                     double z1, double z2);

/// Non-intersecting Brownian bridge from (0, 0) at the grid origin to
/// (z1, z2) at the horizon. Built as upper = (W + R) / sqrt 2 and
/// lower = (W - R) / sqrt 2 with W a standard Brownian bridge to
/// (z1 + z2) / sqrt 2 and R an independent standard Bessel bridge to
/// (z1 - z2) / sqrt 2.
PairPath sample_nibb(const Grid& grid, double z1, double z2, RandomStream& rng);

/// Two Gaussian random walks conditioned to satisfy S1(j) > S2(j), j = 1..n.
struct WalkPair {
  int n = 0;
  Eigen::VectorXd upper;  // partial sums S1(0..n)
  Eigen::VectorXd lower;  // partial sums S2(0..n)
  long long attempts = 0;
  bool accepted = false;

  /// The diffusively rescaled, linearly interpolated pair on [0, 1]:
  /// (S(j) / sqrt n) at time j / n.
  PairPath rescaled() const;
};

/// Rejection sampler: proposes fresh walk pairs until one stays ordered.
/// A proposal is abandoned at its first crossing. `max_attempts` <= 0 means
/// no limit; otherwise the last proposal is returned with accepted = false.
WalkPair sample_nonint_walks(int n, RandomStream& rng, long long max_attempts = 0);

/// Exact probability that a proposal is accepted, binom(2n, n) / 4^n.
double nonint_walk_acceptance(int n);

/// Trapezoid evaluation of the integral over [theta, n] of
/// exp(-sqrt(n) (V1(y / n) - V2(y / n))) dy for a pair on [0, 1].
double pgamma_statistic(const PairPath& pair, double n, double theta);

struct TightnessFit {
  std::vector<double> gaps;
  std::vector<double> moments;  // E|Y1(s + gap) - Y1(s)|^4
  double exponent = 0.0;
  double constant = 0.0;  // max over gaps of moment / gap^2
};

/// Fourth-moment increments of rescaled conditioned walks (upper path) over
/// the given gaps, starting at time s.
TightnessFit walk_tightness(int n, double s, const std::vector<double>& gaps, int samples,
                            const SeedSpec& seed);

}  // namespace cdrp
