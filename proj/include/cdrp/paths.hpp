#pragma once

#include <functional>

#include "cdrp/path.hpp"
#include "cdrp/rng.hpp"

namespace cdrp {

/// Free Brownian motion started at x0 with Var(B(t) - B(s)) = sigma (t - s).
Path sample_brownian_motion(const Grid& grid, double x0, double sigma, RandomStream& rng);

/// Brownian bridge from x at the grid origin to y at the horizon.
Path sample_brownian_bridge(const Grid& grid, double x, double y, double sigma, RandomStream& rng);

/// Bessel(3) process with diffusion coefficient sigma started at 0:
/// sqrt(sigma) times the norm of a 3D standard Brownian motion.
/// The grid must start at 0.
Path sample_bessel3(const Grid& grid, double sigma, RandomStream& rng);

/// Bessel bridge from 0 at the grid origin to `endpoint` at the horizon:
/// sqrt(sigma) times the norm of a 3D standard Brownian bridge to a point at
/// distance endpoint / sqrt(sigma). The last value equals `endpoint` exactly.
Path sample_bessel_bridge(const Grid& grid, double endpoint, double sigma, RandomStream& rng);

/// Brownian meander on [0, 1] from the last zero of a Brownian motion:
/// (1 - theta)^{-1/2} |B(theta + (1 - theta) x)|, with B sampled on an
/// internal grid of `resolution` steps and theta its last sign change.
Path sample_meander(const Grid& grid, RandomStream& rng, int resolution = 1 << 14);

/// Maximum of a Brownian bridge with diffusion coefficient sigma from a at
/// time 0 to b at time h, sampled exactly by inverting
/// P(max > m) = exp(-2 (m - a)(m - b) / (sigma h)).
double sample_bridge_max_value(double a, double b, double h, double sigma, RandomStream& rng);

/// Time of that maximum given its value m, sampled exactly: the density is
/// proportional to the product of the first-passage densities of m - a in
/// time t and of m - b in time h - t.
double sample_bridge_argmax(double a, double b, double h, double sigma, double m, RandomStream& rng);

/// Density of R_sigma(t) for a Bessel(3) process started at 0:
/// (2 y^2 / (sigma t)) p_{sigma t}(y) on y >= 0.
double bessel3_density(double t, double y, double sigma = 1.0);
/// Distribution function of R_sigma(t).
double bessel3_cdf(double t, double y, double sigma = 1.0);

/// Density of a coefficient-1 Bessel bridge on [0, 1] ending at a, at time t:
/// (y / (a t)) (p_t(y) / p_1(a)) [p_{1-t}(y - a) - p_{1-t}(y + a)].
std::function<double(double)> bessel_bridge_one_point(double t, double a);

/// Transition density from x at time s to y at time t of the same bridge.
std::function<double(double)> bessel_bridge_transition(double x, double s, double t, double a);

/// Endpoint density of the standard meander, y exp(-y^2 / 2).
double meander_endpoint_density(double y);
double meander_endpoint_cdf(double y);

}  // namespace cdrp
