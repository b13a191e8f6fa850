#include "cdrp/decomp.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "cdrp/nonint.hpp"
#include "cdrp/numerics.hpp"
#include "cdrp/paths.hpp"

namespace cdrp {

Eigen::Index leftmost_argmax(const Eigen::VectorXd& v) {
  if (v.size() == 0) throw std::domain_error("leftmost_argmax: empty vector");
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

namespace {

// Distances from M to the grid points on each side, in increasing order.
void side_times(const Grid& grid, Eigen::Index m, Eigen::VectorXd& left, Eigen::VectorXd& right) {
  const Eigen::Index last = grid.size() - 1;
  left.resize(m + 1);
  right.resize(last - m + 1);
  for (Eigen::Index k = 0; k <= m; ++k) left[k] = grid[m] - grid[m - k];
  for (Eigen::Index k = 0; k <= last - m; ++k) right[k] = grid[m + k] - grid[m];
}

}  // namespace

Decomposition extract_single(const Path& path) {
  Decomposition d;
  const Eigen::Index m = leftmost_argmax(path.values);
  const Eigen::Index last = path.grid.size() - 1;
  const double top = path.values[m];
  d.max_data = {m, path.grid[m], Eigen::VectorXd::Constant(1, top)};
  side_times(path.grid, m, d.left_times, d.right_times);
  d.left1.resize(m + 1);
  d.right1.resize(last - m + 1);
  for (Eigen::Index k = 0; k <= m; ++k) d.left1[k] = top - path.values[m - k];
  for (Eigen::Index k = 0; k <= last - m; ++k) d.right1[k] = top - path.values[m + k];
  return d;
}

Path synth_single(const MaxData& max_data, const BridgeParams& p, RandomStream& rng) {
  const Grid& grid = p.grid;
  const Eigen::Index m = max_data.index;
  const Eigen::Index last = grid.size() - 1;
  if (m < 0 || m > last) throw std::domain_error("synth_single: max index outside grid");
  if (max_data.values.size() != 1) throw std::domain_error("synth_single: expects one max value");
  const double top = max_data.values[0];
  if (top < p.start || top < p.end) throw std::domain_error("synth_single: max value below an endpoint");

  Eigen::VectorXd lt, rt;
  side_times(grid, m, lt, rt);
  Eigen::VectorXd v(grid.size());
  v[m] = top;
  if (m > 0) {
    const Path left = sample_bessel_bridge(Grid(lt), top - p.start, p.sigma, rng);
    for (Eigen::Index k = 1; k <= m; ++k) v[m - k] = top - left.values[k];
  }
  if (m < last) {
    const Path right = sample_bessel_bridge(Grid(rt), top - p.end, p.sigma, rng);
    for (Eigen::Index k = 1; k <= last - m; ++k) v[m + k] = top - right.values[k];
  }
  v[0] = p.start;
  v[last] = p.end;
  return Path(grid, std::move(v), p.sigma);
}

Decomposition extract_joint(const Path& path1, const Path& path2) {
  if (!(path1.grid == path2.grid)) throw std::domain_error("extract_joint: paths must share a grid");
  Decomposition d;
  const Eigen::VectorXd sum = path1.values + path2.values;
  const Eigen::Index m = leftmost_argmax(sum);
  const Eigen::Index last = path1.grid.size() - 1;
  const double b1 = path1.values[m];
  const double b2 = path2.values[m];
  d.max_data = {m, path1.grid[m], Eigen::Vector2d(b1, b2)};
  side_times(path1.grid, m, d.left_times, d.right_times);
  d.left1.resize(m + 1);
  d.left2.resize(m + 1);
  d.right1.resize(last - m + 1);
  d.right2.resize(last - m + 1);
  for (Eigen::Index k = 0; k <= m; ++k) {
    d.left1[k] = b1 - path1.values[m - k];
    d.left2[k] = -b2 + path2.values[m - k];
  }
  for (Eigen::Index k = 0; k <= last - m; ++k) {
    d.right1[k] = b1 - path1.values[m + k];
    d.right2[k] = -b2 + path2.values[m + k];
  }
  return d;
}

std::pair<Path, Path> synth_joint(const MaxData& max_data, const PairBridgeParams& p, RandomStream& rng) {
  const Grid& grid = p.grid;
  const Eigen::Index m = max_data.index;
  const Eigen::Index last = grid.size() - 1;
  if (m < 0 || m > last) throw std::domain_error("synth_joint: max index outside grid");
  if (max_data.values.size() != 2) throw std::domain_error("synth_joint: expects two max values");
  const double v1 = max_data.values[0];
  const double v2 = max_data.values[1];
  if ((m > 0 && !(v1 + v2 > p.start1 + p.start2)) || (m < last && !(v1 + v2 > p.end1 + p.end2))) {
    throw std::domain_error("synth_joint: endpoints infeasible, need B1(M) + B2(M) above both endpoint sums");
  }

  Eigen::VectorXd lt, rt;
  side_times(grid, m, lt, rt);
  Eigen::VectorXd u(grid.size()), w(grid.size());
  u[m] = v1;
  w[m] = v2;
  if (m > 0) {
    const PairPath left = sample_nibb(Grid(lt), v1 - p.start1, -v2 + p.start2, rng);
    for (Eigen::Index k = 1; k <= m; ++k) {
      u[m - k] = v1 - left.upper[k];
      w[m - k] = v2 + left.lower[k];
    }
  }
  if (m < last) {
    const PairPath right = sample_nibb(Grid(rt), v1 - p.end1, -v2 + p.end2, rng);
    for (Eigen::Index k = 1; k <= last - m; ++k) {
      u[m + k] = v1 - right.upper[k];
      w[m + k] = v2 + right.lower[k];
    }
  }
  u[0] = p.start1;
  w[0] = p.start2;
  u[last] = p.end1;
  w[last] = p.end2;
  return {Path(grid, std::move(u), 1.0), Path(grid, std::move(w), 1.0)};
}

namespace {

struct StepMax {
  Eigen::Index step = 0;  // the maximum lies in (grid[step], grid[step + 1])
  double time = 0.0;
  double value = 0.0;
};

StepMax continuous_max(const Grid& grid, const Eigen::VectorXd& v, double sigma, RandomStream& rng) {
  StepMax best{0, grid[0], -std::numeric_limits<double>::infinity()};
  for (Eigen::Index i = 0; i + 1 < grid.size(); ++i) {
    const double m = sample_bridge_max_value(v[i], v[i + 1], grid[i + 1] - grid[i], sigma, rng);
    if (m > best.value) best = {i, 0.0, m};
  }
  const Eigen::Index i = best.step;
  best.time = grid[i] + sample_bridge_argmax(v[i], v[i + 1], grid[i + 1] - grid[i], sigma, best.value, rng);
  return best;
}

// Grid and values with (time, value) inserted after `step`, unless the time
// falls on a grid point.
std::pair<Grid, Eigen::VectorXd> with_point(const Grid& grid, const Eigen::VectorXd& v, const StepMax& m,
                                            double value) {
  const Eigen::Index i = m.step;
  if (!(m.time > grid[i] && m.time < grid[i + 1])) return {grid, v};
  const Eigen::Index n = grid.size();
  Eigen::VectorXd t(n + 1), u(n + 1);
  t << grid.times().head(i + 1), m.time, grid.times().tail(n - i - 1);
  u << v.head(i + 1), value, v.tail(n - i - 1);
  return {Grid(std::move(t)), std::move(u)};
}

}  // namespace

Path insert_continuous_max(const Path& path, RandomStream& rng) {
  if (path.grid.size() < 2) throw std::domain_error("insert_continuous_max: needs at least one step");
  const StepMax m = continuous_max(path.grid, path.values, path.diffusion_coeff, rng);
  auto [g, v] = with_point(path.grid, path.values, m, m.value);
  return Path(std::move(g), std::move(v), path.diffusion_coeff);
}

std::pair<Path, Path> insert_continuous_max(const Path& path1, const Path& path2, RandomStream& rng) {
  if (!(path1.grid == path2.grid)) throw std::domain_error("insert_continuous_max: paths must share a grid");
  if (path1.diffusion_coeff != path2.diffusion_coeff) {
    throw std::domain_error("insert_continuous_max: paths must share a diffusion coefficient");
  }
  const Grid& grid = path1.grid;
  const double sigma = path1.diffusion_coeff;
  const Eigen::VectorXd sum = path1.values + path2.values;
  const Eigen::VectorXd diff = path1.values - path2.values;
  const StepMax m = continuous_max(grid, sum, 2.0 * sigma, rng);
  const Eigen::Index i = m.step;
  const double h = grid[i + 1] - grid[i];
  const double r = (m.time - grid[i]) / h;
  const double d = diff[i] + r * (diff[i + 1] - diff[i]) +
                   std::sqrt(std::max(0.0, 2.0 * sigma * r * (1.0 - r) * h)) * rng.normal();
  auto [g1, v1] = with_point(grid, path1.values, m, 0.5 * (m.value + d));
  auto [g2, v2] = with_point(grid, path2.values, m, 0.5 * (m.value - d));
  return {Path(g1, std::move(v1), sigma), Path(std::move(g2), std::move(v2), sigma)};
}

void write_csv(std::ostream& out, const Decomposition& d) {
  const bool joint = d.left2.size() > 0 || d.right2.size() > 0;
  out << (joint ? "side,time,comp1,comp2\n" : "side,time,comp1\n");
  auto rows = [&](const char* side, const Eigen::VectorXd& t, const Eigen::VectorXd& c1,
                  const Eigen::VectorXd& c2) {
    for (Eigen::Index k = 0; k < t.size(); ++k) {
      out << side << ',' << format_double(t[k]) << ',' << format_double(c1[k]);
      if (joint) out << ',' << format_double(c2[k]);
      out << '\n';
    }
  };
  rows("left", d.left_times, d.left1, d.left2);
  rows("right", d.right_times, d.right1, d.right2);
}

double log_gibbs_weight(const Path& f, const Path& g, double t, double a, double b) {
  if (!(f.grid == g.grid)) throw std::domain_error("gibbs_weight: curves must share a grid");
  if (!(t >= 1.0)) throw std::domain_error("gibbs_weight: requires t >= 1");
  const Eigen::Index ia = f.grid.find(a);
  const Eigen::Index ib = f.grid.find(b);
  if (ia < 0 || ib < 0 || !(ia < ib)) throw std::domain_error("gibbs_weight: [a, b] must be a grid subinterval");
  const double scale = std::pow(t, 2.0 / 3.0);
  const double rate = std::cbrt(t);
  // Trapezoid sum of exp(rate (g - f)) in log space.
  double log_acc = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = ia; i < ib; ++i) {
    const double h = f.grid[i + 1] - f.grid[i];
    const double e0 = rate * (g.values[i] - f.values[i]);
    const double e1 = rate * (g.values[i + 1] - f.values[i + 1]);
    const double hi = std::max(e0, e1);
    const double term = hi + std::log(0.5 * h * (std::exp(e0 - hi) + std::exp(e1 - hi)));
    log_acc = log_add_exp(log_acc, term);
  }
  return -scale * std::exp(log_acc);
}

double gibbs_weight(const Path& f, const Path& g, double t, double a, double b) {
  return std::exp(log_gibbs_weight(f, g, t, a, b));
}

}  // namespace cdrp
