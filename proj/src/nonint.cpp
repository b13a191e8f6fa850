#include "cdrp/nonint.hpp"

#include <cmath>
#include <stdexcept>

#include "cdrp/numerics.hpp"
#include "cdrp/paths.hpp"
#include "cdrp/stats.hpp"

namespace cdrp {

double nibm_normalizer() {
  static const double value = [] {
    auto f = [](double r1, double r2) { return (r1 - r2) * heat_kernel(r1, 1.0) * heat_kernel(r2, 1.0); };
    return quadrature_2d(
        f, -12.0, 12.0, [](double) { return -12.0; }, [](double r1) { return r1; }, 1e-11);
  }();
  return value;
}

double nonint_survival(double y1, double y2, double tau) {
  if (!(tau > 0.0)) throw std::domain_error("nonint_survival: tau must be > 0");
  if (y1 <= y2) return 0.0;
  return std::erf((y1 - y2) / (2.0 * std::sqrt(tau)));
}

double nibm_density_t1(double y1, double y2) {
  if (y1 <= y2) return 0.0;
  return (y1 - y2) * heat_kernel(y1, 1.0) * heat_kernel(y2, 1.0) / nibm_normalizer();
}

double nibm_density(double t, double y1, double y2) {
  if (!(t > 0.0 && t <= 1.0)) throw std::domain_error("nibm_density: requires 0 < t <= 1");
  if (t == 1.0) return nibm_density_t1(y1, y2);
  if (y1 <= y2) return 0.0;
  return (y1 - y2) * heat_kernel(y1, t) * heat_kernel(y2, t) * nonint_survival(y1, y2, 1.0 - t) /
         (t * nibm_normalizer());
}

std::function<double(double, double)> nibm_transition(double s, double t, double x1, double x2) {
  if (!(0.0 < s && s < t && t <= 1.0)) throw std::domain_error("nibm_transition: requires 0 < s < t <= 1");
  if (!(x1 > x2)) throw std::domain_error("nibm_transition: requires x1 > x2");
  const double denom = nonint_survival(x1, x2, 1.0 - s);
  return [=](double y1, double y2) {
    if (y1 <= y2) return 0.0;
    const double tail = t == 1.0 ? 1.0 : nonint_survival(y1, y2, 1.0 - t);
    return det2_heat(x1, x2, y1, y2, t - s) * tail / denom;
  };
}

double nibm_t1_upper_cdf(double y) {
  const double phi = heat_kernel(y, 1.0);
  return normal_cdf(std::numbers::sqrt2 * y) - std::sqrt(std::numbers::pi) * phi * normal_cdf(y);
}

double nibm_t1_lower_cdf(double y) { return 1.0 - nibm_t1_upper_cdf(-y); }

std::function<double(double, double)> nibb_one_point(double t, double z1, double z2) {
  if (!(t > 0.0 && t < 1.0)) throw std::domain_error("nibb_one_point: requires 0 < t < 1");
  if (!(z1 > z2)) throw std::domain_error("nibb_one_point: requires z1 > z2");
  const double log_norm = std::log(t * (z1 - z2)) + log_heat_kernel(z1, 1.0) + log_heat_kernel(z2, 1.0);
  return [=](double y1, double y2) {
    if (y1 <= y2) return 0.0;
    const double scale = std::exp(log_heat_kernel(y1, t) + log_heat_kernel(y2, t) - log_norm);
    return (y1 - y2) * scale * det2_heat(y1, y2, z1, z2, 1.0 - t);
  };
}

std::function<double(double, double)> nibb_transition(double s, double t, double x1, double x2,
                                                     double z1, double z2) {
  if (!(0.0 < s && s < t && t < 1.0)) throw std::domain_error("nibb_transition: requires 0 < s < t < 1");
  if (!(x1 > x2)) throw std::domain_error("nibb_transition: requires x1 > x2");
  if (!(z1 > z2)) throw std::domain_error("nibb_transition: requires z1 > z2");
  const double denom = det2_heat(x1, x2, z1, z2, 1.0 - s);
  return [=](double y1, double y2) {
    if (y1 <= y2) return 0.0;
    return det2_heat(x1, x2, y1, y2, t - s) * det2_heat(y1, y2, z1, z2, 1.0 - t) / denom;
  };
}

PairPath sample_nibb(const Grid& grid, double z1, double z2, RandomStream& rng) {
  if (!(z1 > z2)) throw std::domain_error("sample_nibb: requires z1 > z2");
  detail::require_finite(z1, "z1");
  detail::require_finite(z2, "z2");
  const double r2 = std::numbers::sqrt2;
  const Path w = sample_brownian_bridge(grid, 0.0, (z1 + z2) / r2, 1.0, rng);
  const Path r = sample_bessel_bridge(grid, (z1 - z2) / r2, 1.0, rng);
  Eigen::VectorXd upper = (w.values + r.values) / r2;
  Eigen::VectorXd lower = (w.values - r.values) / r2;
  const Eigen::Index last = grid.size() - 1;
  upper[0] = lower[0] = 0.0;
  upper[last] = z1;
  lower[last] = z2;
  return PairPath(grid, std::move(upper), std::move(lower), 1.0);
}

PairPath WalkPair::rescaled() const {
  const double root = std::sqrt(static_cast<double>(n));
  return PairPath(Grid::uniform(0.0, 1.0, n), upper / root, lower / root, 1.0);
}

WalkPair sample_nonint_walks(int n, RandomStream& rng, long long max_attempts) {
  if (n < 1) throw std::domain_error("sample_nonint_walks: requires n >= 1");
  WalkPair out;
  out.n = n;
  out.upper = Eigen::VectorXd::Zero(n + 1);
  out.lower = Eigen::VectorXd::Zero(n + 1);
  while (max_attempts <= 0 || out.attempts < max_attempts) {
    ++out.attempts;
    bool ok = true;
    for (int j = 1; j <= n; ++j) {
      out.upper[j] = out.upper[j - 1] + rng.normal();
      out.lower[j] = out.lower[j - 1] + rng.normal();
      if (!(out.upper[j] > out.lower[j])) {
        ok = false;
        break;
      }
    }
    if (ok) {
      out.accepted = true;
      return out;
    }
  }
  return out;
}

double nonint_walk_acceptance(int n) {
  if (n < 0) throw std::domain_error("nonint_walk_acceptance: requires n >= 0");
  return std::exp(std::lgamma(2.0 * n + 1.0) - 2.0 * std::lgamma(n + 1.0) - 2.0 * n * std::log(2.0));
}

double pgamma_statistic(const PairPath& pair, double n, double theta) {
  if (!(theta < n)) throw std::domain_error("pgamma_statistic: requires theta < n");
  if (!(n > 0.0)) throw std::domain_error("pgamma_statistic: requires n > 0");
  const double u0 = theta / n;
  const Grid& g = pair.grid;
  if (u0 < g.origin() || g.horizon() < 1.0) {
    throw std::domain_error("pgamma_statistic: grid does not cover [theta / n, 1]");
  }
  const double root = std::sqrt(n);
  auto integrand = [root](double gap) { return std::exp(-root * gap); };
  double prev_u = u0;
  double prev_f = integrand(pair.upper_at(u0) - pair.lower_at(u0));
  double acc = 0.0;
  for (Eigen::Index i = 0; i < g.size() && g[i] <= 1.0; ++i) {
    if (g[i] <= u0) continue;
    const double f = integrand(pair.upper[i] - pair.lower[i]);
    acc += 0.5 * (f + prev_f) * (g[i] - prev_u);
    prev_u = g[i];
    prev_f = f;
  }
  return n * acc;
}

TightnessFit walk_tightness(int n, double s, const std::vector<double>& gaps, int samples,
                            const SeedSpec& seed) {
  if (gaps.size() < 2 || samples < 1) throw std::domain_error("walk_tightness: needs >= 2 gaps and samples");
  TightnessFit fit;
  fit.gaps = gaps;
  fit.moments.assign(gaps.size(), 0.0);
  for (int k = 0; k < samples; ++k) {
    RandomStream rng(seed.child(k));
    const PairPath p = sample_nonint_walks(n, rng).rescaled();
    const double base = p.upper_at(s);
    for (std::size_t g = 0; g < gaps.size(); ++g) {
      const double d = p.upper_at(s + gaps[g]) - base;
      fit.moments[g] += d * d * d * d / samples;
    }
  }
  fit.exponent = stats::fit_exponent(fit.gaps, fit.moments).slope;
  for (std::size_t g = 0; g < gaps.size(); ++g) {
    fit.constant = std::max(fit.constant, fit.moments[g] / (gaps[g] * gaps[g]));
  }
  return fit;
}

}  // namespace cdrp
