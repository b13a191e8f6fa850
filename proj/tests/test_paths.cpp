#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "cdrp/numerics.hpp"
#include "cdrp/paths.hpp"
#include "cdrp/stats.hpp"

using namespace cdrp;

TEST_CASE("grid validation and parsing") {
  CHECK_THROWS_AS(Grid(Eigen::VectorXd::Zero(1)), std::domain_error);
  CHECK_THROWS_AS(Grid(Eigen::Vector3d(0.0, 0.5, 0.5)), std::domain_error);
  const Grid g = Grid::parse("0:1:1024");
  CHECK(g.size() == 1025);
  CHECK(g.horizon() == 1.0);
  CHECK(g.find(0.5) == 512);
  CHECK(g.find(0.50001) == -1);
  CHECK_THROWS_AS(Grid::parse("0:1"), std::invalid_argument);
  CHECK_THROWS_AS(Grid::parse("0:1:x"), std::invalid_argument);
  CHECK_THROWS_AS(Grid::parse("1:0:4"), std::domain_error);
}

TEST_CASE("brownian bridge pins and midpoint variance") {
  const Grid g(Eigen::Vector3d(0.0, 0.5, 1.0));
  std::vector<double> mid1, mid2;
  for (int k = 0; k < 100000; ++k) {
    RandomStream r1(SeedSpec{1, static_cast<std::uint64_t>(k)});
    RandomStream r2(SeedSpec{1, static_cast<std::uint64_t>(k)});
    const Path a = sample_brownian_bridge(g, 0.0, 0.0, 1.0, r1);
    const Path b = sample_brownian_bridge(g, 0.0, 0.0, 2.0, r2);
    REQUIRE(a.values[0] == 0.0);
    REQUIRE(a.values[2] == 0.0);
    mid1.push_back(a.values[1]);
    mid2.push_back(b.values[1]);
  }
  CHECK(std::abs(stats::variance(mid1) - 0.25) < 0.01);
  // Shared seeds: the sigma = 2 sample is exactly sqrt 2 times the other.
  CHECK(stats::variance(mid2) / stats::variance(mid1) == doctest::Approx(2.0).epsilon(1e-9));

  RandomStream r(SeedSpec{2, 0});
  const Path p = sample_brownian_bridge(Grid::uniform(0.0, 3.0, 17), -1.25, 2.5, 0.7, r);
  CHECK(p.values[0] == -1.25);
  CHECK(p.values[17] == 2.5);
}

TEST_CASE("brownian motion increments") {
  const Grid g = Grid::uniform(0.0, 2.0, 4);
  std::vector<double> inc1, inc2;
  for (int k = 0; k < 100000; ++k) {
    RandomStream r(SeedSpec{3, static_cast<std::uint64_t>(k)});
    const Path p = sample_brownian_motion(g, 0.75, 1.0, r);
    REQUIRE(p.values[0] == 0.75);
    inc1.push_back((p.values[1] - p.values[0]) / std::sqrt(0.5));
    inc2.push_back((p.values[3] - p.values[2]) / std::sqrt(0.5));
  }
  CHECK(*stats::ks_one_sample(inc1, normal_cdf).p_value > 0.01);
  CHECK(std::abs(stats::pearson(inc1, inc2)) < 0.01);
}

TEST_CASE("diffusion coefficient scales increment variance") {
  const Grid g = Grid::uniform(0.0, 1.0, 2);
  std::vector<double> a, b;
  for (int k = 0; k < 100000; ++k) {
    RandomStream r1(SeedSpec{4, static_cast<std::uint64_t>(k)});
    RandomStream r2(SeedSpec{5, static_cast<std::uint64_t>(k)});
    a.push_back(sample_brownian_motion(g, 0.0, 1.0, r1).values[1]);
    b.push_back(sample_brownian_motion(g, 0.0, 2.0, r2).values[1]);
  }
  const double ratio = stats::variance(b) / stats::variance(a);
  CHECK(ratio >= 1.95);
  CHECK(ratio <= 2.05);
}

TEST_CASE("bessel3 marginal and Pitman identity") {
  const Grid g = Grid::uniform(0.0, 1.0, 1);
  std::vector<double> r1;
  for (int k = 0; k < 100000; ++k) {
    RandomStream r(SeedSpec{6, static_cast<std::uint64_t>(k)});
    const Path p = sample_bessel3(g, 1.0, r);
    REQUIRE(p.values.minCoeff() >= 0.0);
    r1.push_back(p.values[1]);
  }
  CHECK(*stats::ks_one_sample(r1, [](double y) { return bessel3_cdf(1.0, y); }).p_value > 0.01);
  RandomStream spare(SeedSpec{});
  CHECK_THROWS_AS(sample_bessel3(Grid::uniform(0.5, 1.0, 2), 1.0, spare), std::domain_error);

  // 2 max B - B on a fine grid, compared with an exact Bessel sample.
  const Grid fine = Grid::uniform(0.0, 1.0, 4096);
  std::vector<double> pitman, direct;
  for (int k = 0; k < 5000; ++k) {
    RandomStream r(SeedSpec{7, static_cast<std::uint64_t>(k)});
    const Path b = sample_brownian_motion(fine, 0.0, 1.0, r);
    pitman.push_back(2.0 * b.values.maxCoeff() - b.values[4096]);
    direct.push_back(sample_bessel3(g, 1.0, r).values[1]);
  }
  CHECK(*stats::ks_two_sample(pitman, direct).p_value > 0.01);
}

TEST_CASE("bessel bridge densities") {
  const auto one = bessel_bridge_one_point(0.5, 1.0);
  CHECK(one(0.0) == 0.0);
  CHECK(std::abs(quadrature_1d(one, 0.0, 12.0) - 1.0) < 1e-8);
  const auto tr = bessel_bridge_transition(0.7, 0.2, 0.8, 1.0);
  CHECK(tr(0.0) == 0.0);
  CHECK(std::abs(quadrature_1d(tr, 0.0, 12.0) - 1.0) < 1e-8);

  // Chapman-Kolmogorov through r = 0.5.
  for (double y : {0.3, 1.0, 1.8}) {
    const double direct = bessel_bridge_transition(0.7, 0.2, 0.8, 1.0)(y);
    const auto first = bessel_bridge_transition(0.7, 0.2, 0.5, 1.0);
    const double composed = quadrature_1d(
        [&](double m) { return m <= 0.0 ? 0.0 : first(m) * bessel_bridge_transition(m, 0.5, 0.8, 1.0)(y); }, 0.0,
        12.0, 1e-11);
    CHECK(std::abs(composed - direct) < 1e-6);
  }
  // One-point consistency: one_point(0.3) pushed to 0.6 equals one_point(0.6).
  for (double y : {0.4, 1.2}) {
    const auto a = bessel_bridge_one_point(0.3, 1.0);
    const double pushed = quadrature_1d(
        [&](double x) { return x <= 0.0 ? 0.0 : a(x) * bessel_bridge_transition(x, 0.3, 0.6, 1.0)(y); }, 0.0, 12.0,
        1e-11);
    CHECK(std::abs(pushed - bessel_bridge_one_point(0.6, 1.0)(y)) < 1e-6);
  }
  CHECK_THROWS_AS(bessel_bridge_one_point(1.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(bessel_bridge_transition(0.0, 0.2, 0.5, 1.0), std::domain_error);
}

TEST_CASE("bessel bridge sampler") {
  const Grid g = Grid::uniform(0.0, 1.0, 2);
  std::vector<double> mid;
  for (int k = 0; k < 100000; ++k) {
    RandomStream r(SeedSpec{8, static_cast<std::uint64_t>(k)});
    const Path p = sample_bessel_bridge(g, 1.0, 1.0, r);
    REQUIRE(p.values[2] == 1.0);
    REQUIRE(p.values.minCoeff() >= 0.0);
    mid.push_back(p.values[1]);
  }
  const auto cdf = stats::TabulatedCdf::from_density(bessel_bridge_one_point(0.5, 1.0), 0.0, 8.0);
  CHECK(*stats::ks_one_sample(mid, [&](double y) { return cdf(y); }).p_value > 0.01);
  RandomStream r(SeedSpec{});
  CHECK_THROWS_AS(sample_bessel_bridge(g, 0.0, 1.0, r), std::domain_error);
}

TEST_CASE("bridge scaling") {
  // A unit bridge stretched to [0, c] matches a bridge sampled on [0, c].
  const double c = 4.0;
  std::vector<double> scaled, direct;
  for (int k = 0; k < 20000; ++k) {
    RandomStream r1(SeedSpec{9, static_cast<std::uint64_t>(k)});
    RandomStream r2(SeedSpec{10, static_cast<std::uint64_t>(k)});
    scaled.push_back(std::sqrt(c) * sample_bessel_bridge(Grid::uniform(0.0, 1.0, 4), 0.5, 1.0, r1).values[1]);
    direct.push_back(sample_bessel_bridge(Grid::uniform(0.0, c, 4), 0.5 * std::sqrt(c), 1.0, r2).values[1]);
  }
  CHECK(*stats::ks_two_sample(scaled, direct).p_value > 0.01);
}

TEST_CASE("exact bridge maximum") {
  // Exceedance P(M > m) = exp(-2 (m - a)(m - b) / (sigma h)) with a = 0.3, b = -0.2.
  const double a = 0.3, b = -0.2, h = 2.0, sigma = 1.5;
  std::vector<double> maxima;
  for (int k = 0; k < 50000; ++k) {
    RandomStream r(SeedSpec{11, static_cast<std::uint64_t>(k)});
    maxima.push_back(sample_bridge_max_value(a, b, h, sigma, r));
  }
  const auto cdf = [&](double m) { return m <= a ? 0.0 : 1.0 - std::exp(-2.0 * (m - a) * (m - b) / (sigma * h)); };
  CHECK(*stats::ks_one_sample(maxima, cdf).p_value > 0.01);
}

TEST_CASE("exact bridge argmax") {
  // A bridge from 0 to 0 attains its maximum at a uniform time.
  std::vector<double> times;
  for (int k = 0; k < 40000; ++k) {
    RandomStream r(SeedSpec{12, static_cast<std::uint64_t>(k)});
    const double m = sample_bridge_max_value(0.0, 0.0, 1.0, 1.0, r);
    const double t = sample_bridge_argmax(0.0, 0.0, 1.0, 1.0, m, r);
    REQUIRE(t > 0.0);
    REQUIRE(t < 1.0);
    times.push_back(t);
  }
  CHECK(*stats::ks_one_sample(times, [](double t) { return std::clamp(t, 0.0, 1.0); }).p_value > 0.01);

  // Fixed m: density proportional to the product of first-passage densities.
  for (const double m : {0.05, 0.6, 3.0}) {
    const double a = 0.0, b = -0.4, h = 1.0, sigma = 2.0;
    const auto passage = [&](double x, double t) { return x / std::pow(t, 1.5) * std::exp(-x * x / (2 * sigma * t)); };
    const auto density = [&](double t) { return t <= 0 || t >= h ? 0.0 : passage(m - a, t) * passage(m - b, h - t); };
    const double total = quadrature_1d(density, 0.0, h, 1e-12);
    std::vector<double> given;
    for (int k = 0; k < 20000; ++k) {
      RandomStream r(SeedSpec{13, static_cast<std::uint64_t>(k)});
      given.push_back(sample_bridge_argmax(a, b, h, sigma, m, r));
    }
    const auto cdf = [&](double t) {
      return t <= 0 ? 0.0 : t >= h ? 1.0 : quadrature_1d(density, 0.0, t, 1e-12) / total;
    };
    CHECK(*stats::ks_one_sample(given, cdf).p_value > 0.01);
  }
  RandomStream r(SeedSpec{});
  CHECK_THROWS(sample_bridge_argmax(0.0, 0.5, 1.0, 1.0, 0.2, r));
}

TEST_CASE("meander") {
  const Grid g = Grid::uniform(0.0, 1.0, 4);
  std::vector<double> end;
  for (int k = 0; k < 4000; ++k) {
    RandomStream r(SeedSpec{11, static_cast<std::uint64_t>(k)});
    const Path p = sample_meander(g, r);
    REQUIRE(p.values[0] == 0.0);
    REQUIRE(p.values.minCoeff() >= 0.0);
    end.push_back(p.values[4]);
  }
  CHECK(*stats::ks_one_sample(end, meander_endpoint_cdf).p_value > 0.01);
  CHECK(quadrature_1d(meander_endpoint_density, 0.0, 12.0) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("csv output") {
  std::ostringstream os;
  write_csv(os, Path(Grid::uniform(0.0, 1.0, 2), Eigen::Vector3d(0.0, 0.1, -2.0)));
  CHECK(os.str() == "time,value\n0,0\n0.5,0.10000000000000001\n1,-2\n");
}
