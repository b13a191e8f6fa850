#include "cdrp/paths.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cdrp/numerics.hpp"

namespace cdrp {

namespace {

void require_sigma(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw std::domain_error("diffusion coefficient must be finite and > 0");
}

// Standard Brownian motion from 0 at the grid origin, written into out.
void standard_motion(const Grid& grid, RandomStream& rng, Eigen::Ref<Eigen::VectorXd> out) {
  out[0] = 0.0;
  for (Eigen::Index i = 1; i < grid.size(); ++i) {
    out[i] = out[i - 1] + std::sqrt(grid[i] - grid[i - 1]) * rng.normal();
  }
}

// Converts a standard motion into a standard bridge from 0 to `target`.
void pin(const Grid& grid, double target, Eigen::Ref<Eigen::VectorXd> w) {
  const Eigen::Index last = grid.size() - 1;
  const double span = grid.horizon() - grid.origin();
  const double end = w[last];
  for (Eigen::Index i = 0; i <= last; ++i) {
    const double frac = (grid[i] - grid.origin()) / span;
    w[i] += frac * (target - end);
  }
  w[last] = target;
}

// |Z| conditioned on |Z| >= c for a standard normal Z.
double normal_tail(double c, RandomStream& rng) {
  if (c < 1.0) {
    while (true) {
      const double z = std::abs(rng.normal());
      if (z >= c) return z;
    }
  }
  while (true) {
    const double x = std::sqrt(c * c - 2.0 * std::log(rng.uniform()));
    if (rng.uniform() * x <= c) return x;
  }
}

// s^{-3/2} exp(-d^2 / (2 sigma s)) and its maximum over [lo, hi].
double passage_factor(double d, double sigma, double s) { return std::pow(s, -1.5) * std::exp(-d * d / (2.0 * sigma * s)); }
double passage_bound(double d, double sigma, double lo, double hi) {
  return passage_factor(d, sigma, std::clamp(d * d / (3.0 * sigma), lo, hi));
}

}  // namespace

Path sample_brownian_motion(const Grid& grid, double x0, double sigma, RandomStream& rng) {
  require_sigma(sigma);
  detail::require_finite(x0, "x0");
  Eigen::VectorXd v(grid.size());
  standard_motion(grid, rng, v);
  v = (x0 + std::sqrt(sigma) * v.array()).matrix();
  v[0] = x0;
  return Path(grid, std::move(v), sigma);
}

Path sample_brownian_bridge(const Grid& grid, double x, double y, double sigma, RandomStream& rng) {
  require_sigma(sigma);
  detail::require_finite(x, "x");
  detail::require_finite(y, "y");
  Eigen::VectorXd v(grid.size());
  standard_motion(grid, rng, v);
  pin(grid, (y - x) / std::sqrt(sigma), v);
  v = (x + std::sqrt(sigma) * v.array()).matrix();
  v[0] = x;
  v[grid.size() - 1] = y;
  return Path(grid, std::move(v), sigma);
}

Path sample_bessel3(const Grid& grid, double sigma, RandomStream& rng) {
  require_sigma(sigma);
  if (grid.origin() != 0.0) throw std::domain_error("sample_bessel3: grid must start at 0");
  Eigen::MatrixXd w(grid.size(), 3);
  for (int c = 0; c < 3; ++c) standard_motion(grid, rng, w.col(c));
  Eigen::VectorXd v = std::sqrt(sigma) * w.rowwise().norm();
  return Path(grid, std::move(v), sigma);
}

Path sample_bessel_bridge(const Grid& grid, double endpoint, double sigma, RandomStream& rng) {
  require_sigma(sigma);
  if (!(endpoint > 0.0) || !std::isfinite(endpoint)) {
    throw std::domain_error("sample_bessel_bridge: endpoint must be finite and > 0");
  }
  Eigen::MatrixXd w(grid.size(), 3);
  for (int c = 0; c < 3; ++c) {
    standard_motion(grid, rng, w.col(c));
    pin(grid, c == 0 ? endpoint / std::sqrt(sigma) : 0.0, w.col(c));
  }
  Eigen::VectorXd v = std::sqrt(sigma) * w.rowwise().norm();
  v[0] = 0.0;
  v[grid.size() - 1] = endpoint;
  return Path(grid, std::move(v), sigma);
}

Path sample_meander(const Grid& grid, RandomStream& rng, int resolution) {
  if (grid.origin() != 0.0 || grid.horizon() != 1.0) {
    throw std::domain_error("sample_meander: grid must span [0, 1]");
  }
  if (resolution < 2) throw std::domain_error("sample_meander: resolution must be >= 2");
  const Grid fine = Grid::uniform(0.0, 1.0, resolution);
  Eigen::VectorXd b(fine.size());
  standard_motion(fine, rng, b);

  // Last sign change, located by linear interpolation inside its cell.
  double theta = 0.0;
  for (Eigen::Index i = fine.size() - 1; i > 0; --i) {
    if ((b[i - 1] <= 0.0) != (b[i] <= 0.0) || b[i - 1] == 0.0) {
      const double w = b[i - 1] / (b[i - 1] - b[i]);
      theta = fine[i - 1] + w * (fine[i] - fine[i - 1]);
      break;
    }
  }
  b[0] = 0.0;
  const double scale = 1.0 / std::sqrt(1.0 - theta);
  Eigen::VectorXd v(grid.size());
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    const double s = std::min(1.0, theta + (1.0 - theta) * grid[i]);
    v[i] = scale * std::abs(interpolate(fine, b, s));
  }
  v[0] = 0.0;
  return Path(grid, std::move(v), 1.0);
}

double bessel3_density(double t, double y, double sigma) {
  require_sigma(sigma);
  if (!(t > 0.0)) throw std::domain_error("bessel3_density: t must be > 0");
  if (y <= 0.0) return 0.0;
  const double v = sigma * t;
  return 2.0 * y * y / v * heat_kernel(y, v);
}

double bessel3_cdf(double t, double y, double sigma) {
  require_sigma(sigma);
  if (!(t > 0.0)) throw std::domain_error("bessel3_cdf: t must be > 0");
  if (y <= 0.0) return 0.0;
  const double z = y / std::sqrt(sigma * t);
  return std::erf(z / std::numbers::sqrt2) - 2.0 * z * heat_kernel(z, 1.0);
}

std::function<double(double)> bessel_bridge_one_point(double t, double a) {
  if (!(t > 0.0 && t < 1.0)) throw std::domain_error("bessel_bridge_one_point: requires 0 < t < 1");
  if (!(a > 0.0) || !std::isfinite(a)) throw std::domain_error("bessel_bridge_one_point: requires a > 0");
  return [t, a](double y) {
    if (y <= 0.0) return 0.0;
    const double ratio = std::exp(log_heat_kernel(y, t) - log_heat_kernel(a, 1.0));
    return y / (a * t) * ratio * killed_heat_kernel(y, a, 1.0 - t);
  };
}

std::function<double(double)> bessel_bridge_transition(double x, double s, double t, double a) {
  if (!(0.0 < s && s < t && t < 1.0)) throw std::domain_error("bessel_bridge_transition: requires 0 < s < t < 1");
  if (!(x > 0.0) || !std::isfinite(x)) throw std::domain_error("bessel_bridge_transition: requires x > 0");
  if (!(a > 0.0) || !std::isfinite(a)) throw std::domain_error("bessel_bridge_transition: requires a > 0");
  const double denom = killed_heat_kernel(x, a, 1.0 - s);
  return [=](double y) {
    if (y <= 0.0) return 0.0;
    return killed_heat_kernel(x, y, t - s) * killed_heat_kernel(y, a, 1.0 - t) / denom;
  };
}

double meander_endpoint_density(double y) { return y <= 0.0 ? 0.0 : y * std::exp(-0.5 * y * y); }

double meander_endpoint_cdf(double y) { return y <= 0.0 ? 0.0 : -std::expm1(-0.5 * y * y); }

double sample_bridge_max_value(double a, double b, double h, double sigma, RandomStream& rng) {
  require_sigma(sigma);
  if (!(h > 0.0)) throw std::domain_error("sample_bridge_max_value: requires h > 0");
  const double d = b - a;
  return 0.5 * (a + b + std::sqrt(d * d - 2.0 * sigma * h * std::log(rng.uniform())));
}

double sample_bridge_argmax(double a, double b, double h, double sigma, double m, RandomStream& rng) {
  require_sigma(sigma);
  if (!(h > 0.0)) throw std::domain_error("sample_bridge_argmax: requires h > 0");
  if (!(m >= a && m >= b)) throw std::domain_error("sample_bridge_argmax: maximum below an endpoint");
  const double alpha = m - a;
  const double beta = m - b;
  if (alpha == 0.0) return 0.0;
  if (beta == 0.0) return h;
  // Two-piece rejection. On t <= h/2 the proposal is the first-passage time
  // of alpha, alpha^2 / (sigma Z^2) restricted to t <= h/2, and the other
  // factor is bounded on [h/2, h]; the piece t >= h/2 mirrors it.
  const double half = 0.5 * h;
  const double c_a = alpha / std::sqrt(sigma * half);
  const double c_b = beta / std::sqrt(sigma * half);
  const double k_a = passage_bound(beta, sigma, half, h);
  const double k_b = passage_bound(alpha, sigma, half, h);
  const double w_a = std::erfc(c_a / std::numbers::sqrt2) * beta * k_a;
  const double w_b = std::erfc(c_b / std::numbers::sqrt2) * alpha * k_b;
  while (true) {
    if (rng.uniform() * (w_a + w_b) < w_a) {
      const double z = normal_tail(c_a, rng);
      const double t = alpha * alpha / (sigma * z * z);
      if (rng.uniform() * k_a <= passage_factor(beta, sigma, h - t)) return t;
    } else {
      const double z = normal_tail(c_b, rng);
      const double t = beta * beta / (sigma * z * z);
      if (rng.uniform() * k_b <= passage_factor(alpha, sigma, h - t)) return h - t;
    }
  }
}

}  // namespace cdrp
