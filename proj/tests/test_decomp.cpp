#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "cdrp/decomp.hpp"
#include "cdrp/nonint.hpp"
#include "cdrp/paths.hpp"
#include "cdrp/stats.hpp"

using namespace cdrp;

TEST_CASE("single path decomposition") {
  const Grid grid = Grid::uniform(-1.0, 1.0, 200);
  RandomStream rng(SeedSpec{31, 0});
  const Path b = sample_brownian_bridge(grid, 0.2, -0.3, 2.0, rng);
  const Decomposition d = extract_single(b);
  const Eigen::Index m = d.max_data.index;
  CHECK(b.values[m] == b.values.maxCoeff());
  for (Eigen::Index i = 0; i < m; ++i) CHECK(b.values[i] < b.values[m]);
  CHECK(d.left1.size() == m + 1);
  CHECK(d.right1.size() == grid.size() - m);
  CHECK(d.left1[0] == 0.0);
  CHECK(d.right1[0] == 0.0);
  CHECK(d.left1.minCoeff() >= 0.0);
  CHECK(d.right1.minCoeff() >= 0.0);
  CHECK(d.left_times[d.left_times.size() - 1] == doctest::Approx(d.max_data.location + 1.0));
  CHECK(d.left2.size() == 0);
}

TEST_CASE("ties resolve to the leftmost maximum") {
  Eigen::VectorXd v(5);
  v << 0, 2, 1, 2, 0;
  CHECK(leftmost_argmax(v) == 1);
}

TEST_CASE("synthesis round trip") {
  const Grid grid = Grid::uniform(0.0, 1.0, 100);
  MaxData md{40, grid[40], Eigen::VectorXd::Constant(1, 1.5)};
  RandomStream rng(SeedSpec{32, 0});
  const Path p = synth_single(md, {grid, 0.0, 0.5, 1.0}, rng);
  CHECK(p.values[0] == 0.0);
  CHECK(p.values[100] == 0.5);
  const Decomposition d = extract_single(p);
  CHECK(d.max_data.index == 40);
  CHECK(d.max_data.values[0] == 1.5);

  MaxData joint{30, grid[30], Eigen::Vector2d(1.0, 0.5)};
  const auto [p1, p2] = synth_joint(joint, {grid, 0.0, 0.0, 0.2, -0.1}, rng);
  const Decomposition dj = extract_joint(p1, p2);
  CHECK(dj.max_data.index == 30);
  CHECK((dj.right1 - dj.right2).minCoeff() >= 0.0);
  for (Eigen::Index k = 1; k < dj.left1.size(); ++k) CHECK(dj.left1[k] > dj.left2[k]);
  CHECK_THROWS_AS(synth_joint(MaxData{30, grid[30], Eigen::Vector2d(0.0, 0.1)}, {grid, 0, 0, 0.2, -0.1}, rng),
                  std::domain_error);
  CHECK_THROWS_AS(synth_single(MaxData{40, grid[40], Eigen::VectorXd::Constant(1, 0.1)}, {grid, 0, 0.5, 1}, rng),
                  std::domain_error);
}

TEST_CASE("continuous maximum insertion") {
  // Brownian motion on [0, 1] seen on 4 steps: the inserted maximum follows
  // the half-normal law and its time the arcsine law.
  const Grid grid = Grid::uniform(0.0, 1.0, 4);
  std::vector<double> values, times;
  for (int k = 0; k < 40000; ++k) {
    RandomStream r(SeedSpec{33, static_cast<std::uint64_t>(k)});
    const Path p = sample_brownian_motion(grid, 0.0, 1.0, r);
    const Path q = insert_continuous_max(p, r);
    REQUIRE(q.grid.size() >= p.grid.size());
    REQUIRE(q.grid.size() <= p.grid.size() + 1);
    Eigen::Index m;
    const double top = q.values.maxCoeff(&m);
    REQUIRE(top >= p.values.maxCoeff());
    values.push_back(top);
    times.push_back(q.grid[m]);
  }
  const auto half_normal = [](double x) { return x <= 0 ? 0.0 : std::erf(x / std::sqrt(2.0)); };
  const auto arcsine = [](double t) { return t <= 0 ? 0.0 : t >= 1 ? 1.0 : 2.0 / M_PI * std::asin(std::sqrt(t)); };
  CHECK(*stats::ks_one_sample(values, half_normal).p_value > 0.01);
  CHECK(*stats::ks_one_sample(times, arcsine).p_value > 0.01);

  // Pair version: the maximum goes to the sum, both components share the grid.
  RandomStream r(SeedSpec{34, 0});
  const Path p1 = sample_brownian_motion(grid, 0.0, 1.0, r), p2 = sample_brownian_motion(grid, 0.0, 1.0, r);
  const auto [q1, q2] = insert_continuous_max(p1, p2, r);
  CHECK(q1.grid.size() == q2.grid.size());
  CHECK((q1.values + q2.values).maxCoeff() >= (p1.values + p2.values).maxCoeff());
}

TEST_CASE("CSV output") {
  const Grid grid(Eigen::Vector3d(0.0, 0.5, 1.0));
  Eigen::VectorXd v(3);
  v << 0, 1, 0.25;
  std::ostringstream out;
  write_csv(out, extract_single(Path(grid, v, 1.0)));
  CHECK(out.str() == "side,time,comp1\nleft,0,0\nleft,0.5,1\nright,0,0\nright,0.5,0.75\n");
}

TEST_CASE("Gibbs weights") {
  const Grid grid = Grid::uniform(0.0, 1.0, 100);
  const Path f(grid, Eigen::VectorXd::Zero(101), 1.0);
  CHECK(gibbs_weight(f, f, 1.0, 0.0, 1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  const Path low(grid, Eigen::VectorXd::Constant(101, -100.0), 1.0);
  CHECK(gibbs_weight(f, low, 1.0, 0.0, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
  // With g - f = 0 the integral is t^{2/3} (b - a).
  CHECK(log_gibbs_weight(f, f, 8.0, 0.0, 0.5) == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK_THROWS_AS(gibbs_weight(f, f, 0.5, 0.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(gibbs_weight(f, f, 1.0, 0.0, 0.123), std::domain_error);
}
