#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>
#include <string_view>

namespace cdrp {

/// Strictly increasing, finite time grid with at least two points.
class Grid {
 public:
  explicit Grid(Eigen::VectorXd times);

  /// `intervals` equal steps over [a, b] (intervals + 1 points).
  static Grid uniform(double a, double b, Eigen::Index intervals);

  /// Parses "a:b:N" into Grid::uniform(a, b, N).
  static Grid parse(std::string_view spec);

  const Eigen::VectorXd& times() const { return times_; }
  double origin() const { return times_[0]; }
  double horizon() const { return times_[times_.size() - 1]; }
  Eigen::Index size() const { return times_.size(); }
  double operator[](Eigen::Index i) const { return times_[i]; }

  /// Index of the grid point equal to t (within 1e-12 relative), or -1.
  Eigen::Index find(double t) const;

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.times_.size() == b.times_.size() && a.times_ == b.times_;
  }

 private:
  Eigen::VectorXd times_;
};

/// A real path sampled on a grid. The underlying free increments satisfy
/// Var(B(t) - B(s)) = diffusion_coeff * (t - s).
struct Path {
  Grid grid;
  Eigen::VectorXd values;
  double diffusion_coeff = 1.0;

  Path(Grid g, Eigen::VectorXd v, double sigma = 1.0);

  /// Linear interpolation at t in [origin, horizon].
  double at(double t) const;
};

/// Two paths on a common grid (upper/lower levels of an ordered pair).
struct PairPath {
  Grid grid;
  Eigen::VectorXd upper;
  Eigen::VectorXd lower;
  double diffusion_coeff = 1.0;

  PairPath(Grid g, Eigen::VectorXd up, Eigen::VectorXd low, double sigma = 1.0);

  double upper_at(double t) const;
  double lower_at(double t) const;
};

/// Linear interpolation of `values` on `grid` at time t.
double interpolate(const Grid& grid, const Eigen::VectorXd& values, double t);

/// Shortest round-trip decimal for CSV and JSON output ("%.17g").
std::string format_double(double v);

/// CSV with header `time,value`, one row per grid point, LF endings.
void write_csv(std::ostream& out, const Path& path);
/// CSV with header `time,value1,value2`.
void write_csv(std::ostream& out, const PairPath& pair);

}  // namespace cdrp
