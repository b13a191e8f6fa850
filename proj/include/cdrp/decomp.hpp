#pragma once

#include <iosfwd>
#include <utility>

#include "cdrp/path.hpp"
#include "cdrp/rng.hpp"

namespace cdrp {

/// Leftmost grid argmax of one path, or of the sum of two paths.
struct MaxData {
  Eigen::Index index = 0;
  double location = 0.0;
  Eigen::VectorXd values;  // B(M), or (B1(M), B2(M)) in the joint case
};

/// The pieces of a path (or pair) on either side of its argmax, both
/// parameterized by distance x >= 0 from M. Sides are plain vectors because a
/// side may consist of the single point x = 0.
struct Decomposition {
  MaxData max_data;
  Eigen::VectorXd left_times;
  Eigen::VectorXd left1;
  Eigen::VectorXd left2;  // empty in the single-path case
  Eigen::VectorXd right_times;
  Eigen::VectorXd right1;
  Eigen::VectorXd right2;
};

/// Leftmost index of the largest value.
Eigen::Index leftmost_argmax(const Eigen::VectorXd& v);

/// Single path: left(x) = B(M) - B(M - x), right(x) = B(M) - B(M + x).
Decomposition extract_single(const Path& path);

struct BridgeParams {
  Grid grid;
  double start = 0.0;  // B at the grid origin
  double end = 0.0;    // B at the horizon
  double sigma = 1.0;
};

/// Rebuilds a bridge from its max data: independent Bessel bridges on
/// [a, M] and [M, b] ending at B(M) - start and B(M) - end.
Path synth_single(const MaxData& max_data, const BridgeParams& params, RandomStream& rng);

/// Pair: M maximizes B1 + B2; component 1 is B1(M) - B1(M -+ x) and
/// component 2 is -B2(M) + B2(M -+ x).
Decomposition extract_joint(const Path& path1, const Path& path2);

struct PairBridgeParams {
  Grid grid;
  double start1 = 0.0, start2 = 0.0;
  double end1 = 0.0, end2 = 0.0;
};

/// Rebuilds a pair of unit-coefficient bridges from joint max data with two
/// independent non-intersecting bridges, one per side.
std::pair<Path, Path> synth_joint(const MaxData& max_data, const PairBridgeParams& params,
                                  RandomStream& rng);

/// Treats `path` as Brownian (its diffusion coefficient) between grid points
/// and adds the exact continuous-time maximum to the grid: the maximum over
/// each step is sampled given the step's end values, and its time is sampled
/// in the winning step. The returned path's grid argmax is the true argmax.
Path insert_continuous_max(const Path& path, RandomStream& rng);

/// The pair version for the maximum of path1 + path2: the sum gets its
/// continuous maximum inserted and path1 - path2 is filled in at that time
/// as an independent Brownian bridge across the step.
std::pair<Path, Path> insert_continuous_max(const Path& path1, const Path& path2, RandomStream& rng);

/// CSV with header `side,time,comp1` or `side,time,comp1,comp2`.
void write_csv(std::ostream& out, const Decomposition& d);

/// exp(-integral over [a, b] of t^{2/3} exp(t^{1/3} (g - f))), trapezoid rule
/// on the common grid, accumulated in log space. Returns the log weight.
double log_gibbs_weight(const Path& f, const Path& g, double t, double a, double b);
double gibbs_weight(const Path& f, const Path& g, double t, double a, double b);

}  // namespace cdrp
