#include <doctest.h>

#include <cmath>
#include <vector>

#include "cdrp/dyson.hpp"
#include "cdrp/numerics.hpp"
#include "cdrp/paths.hpp"
#include "cdrp/stats.hpp"

using namespace cdrp;

namespace {
double integrate_ordered(const std::function<double(double, double)>& f, double lo, double hi) {
  return quadrature_2d(f, lo, hi, [lo](double) { return lo; }, [](double y1) { return y1; }, 1e-11);
}
}  // namespace

TEST_CASE("entrance law") {
  for (double t : {0.5, 1.0, 3.0}) {
    CHECK(integrate_ordered([t](double a, double b) { return dbm_entrance(t, a, b); }, -25, 25) ==
          doctest::Approx(1.0).epsilon(1e-8));
  }
  // Brownian scaling.
  const double c = 2.5;
  CHECK(dbm_entrance(c * c, c * 0.7, c * -0.2) * c * c == doctest::Approx(dbm_entrance(1.0, 0.7, -0.2)).epsilon(1e-13));
  for (double y : {-1.0, 0.3, 2.0}) {
    const double direct = quadrature_1d([y](double b) { return dbm_entrance(2.0, y, b); }, -20, y);
    CHECK(dbm_entrance_marginal(2.0, y, 1) == doctest::Approx(direct).epsilon(1e-9));
    CHECK(dbm_entrance_marginal(2.0, -y, 2) == doctest::Approx(direct).epsilon(1e-9));
  }
}

TEST_CASE("transition kernel") {
  const auto q = dbm_transition(1.0, 2.0, 0.5, -0.4);
  CHECK(integrate_ordered(q, -12, 12) == doctest::Approx(1.0).epsilon(1e-8));
  const auto prop = [](double w1, double w2) { return dbm_entrance(1.0, w1, w2) * dbm_transition(1.0, 2.5, w1, w2)(0.9, -0.1); };
  CHECK(integrate_ordered(prop, -12, 12) == doctest::Approx(dbm_entrance(2.5, 0.9, -0.1)).epsilon(1e-7));
  CHECK_THROWS_AS(dbm_transition(1.0, 1.0, 0.5, 0.0), std::domain_error);
}

TEST_CASE("sampler matches the entrance law") {
  const Grid grid(Eigen::Vector3d(0.0, 0.5, 1.0));
  std::vector<double> up, low;
  for (int k = 0; k < 20000; ++k) {
    RandomStream rng(SeedSpec{21, static_cast<std::uint64_t>(k)});
    const PairPath p = sample_dbm(grid, rng);
    REQUIRE(p.upper[2] > p.lower[2]);
    up.push_back(p.upper[2]);
    low.push_back(p.lower[2]);
  }
  const auto m1 = stats::TabulatedCdf::from_density([](double y) { return dbm_entrance_marginal(1, y, 1); }, -8, 8);
  const auto m2 = stats::TabulatedCdf::from_density([](double y) { return dbm_entrance_marginal(1, y, 2); }, -8, 8);
  CHECK(*stats::ks_one_sample(up, [&](double x) { return m1(x); }).p_value > 0.001);
  CHECK(*stats::ks_one_sample(low, [&](double x) { return m2(x); }).p_value > 0.001);
  CHECK(*stats::chi2_binned_2d(up, low, [](double a, double b) { return dbm_entrance(1, a, b); }, m1, m2, 6, true)
             .p_value > 0.001);
}

TEST_CASE("two-sided gluing") {
  const auto two = sample_two_sided([](const Grid& g, RandomStream& r) { return sample_dbm(g, r); }, 2.0, 64,
                                    SeedSpec{22, 0});
  CHECK(two.negative.upper[0] == 0.0);
  CHECK(two.positive.lower[0] == 0.0);
  CHECK(two.negative.upper != two.positive.upper);
  const auto again = sample_two_sided([](const Grid& g, RandomStream& r) { return sample_bessel3(g, 1.0, r); }, 2.0,
                                      64, SeedSpec{22, 0});
  RandomStream right(SeedSpec{22, 0}.child(1));
  CHECK(again.positive.values == sample_bessel3(Grid::uniform(0, 2, 64), 1.0, right).values);
}

TEST_CASE("diffusive limit at small size") {
  DiffusiveLimitOptions o;
  o.samples = 4000;
  o.tolerance = 0.08;
  const auto rep = verify_diffusive_limit(o, SeedSpec{23, 0});
  CHECK(rep.pass);
  o.z1 = 0.9;
  CHECK_THROWS_AS(verify_diffusive_limit(o, SeedSpec{}), std::domain_error);
}

TEST_CASE("Bessel tail integral") {
  BesselTailOptions o;
  o.samples = 200;
  o.step = 0.02;
  const auto rep = besselwd_check(o, SeedSpec{24, 0});
  CHECK(rep.statistics["all_positive"].get<bool>());
  CHECK(rep.statistics["monotone_in_horizon"].get<bool>());
  CHECK(rep.pass);
}
