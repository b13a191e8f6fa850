#include <doctest.h>

#include <cmath>
#include <vector>

#include "cdrp/numerics.hpp"
#include "cdrp/rng.hpp"
#include "cdrp/stats.hpp"

using namespace cdrp;

namespace {
std::vector<double> normals(std::size_t n, double shift, std::uint64_t key) {
  RandomStream rng(SeedSpec{key, 0});
  std::vector<double> v(n);
  for (auto& x : v) x = rng.normal() + shift;
  return v;
}
}  // namespace

TEST_CASE("two-sample KS") {
  const auto a = normals(1000, 0.0, 1);
  const auto same = stats::ks_two_sample(a, a);
  CHECK(same.statistic == 0.0);
  CHECK(*same.p_value == doctest::Approx(1.0));
  const auto far = stats::ks_two_sample(a, normals(1000, 3.0, 2));
  CHECK(*far.p_value < 1e-6);
}

TEST_CASE("KS calibration under the null") {
  int rejections = 0;
  const int trials = 500;
  for (int k = 0; k < trials; ++k) {
    const auto a = normals(200, 0.0, 100 + 2 * k);
    const auto b = normals(300, 0.0, 101 + 2 * k);
    if (*stats::ks_two_sample(a, b).p_value < 0.05) ++rejections;
  }
  CHECK(std::abs(rejections / double(trials) - 0.05) < 0.02);

  rejections = 0;
  for (int k = 0; k < trials; ++k) {
    const auto a = normals(100, 0.0, 5000 + k);
    if (*stats::ks_one_sample(a, [](double x) { return normal_cdf(x); }).p_value < 0.05) ++rejections;
  }
  CHECK(std::abs(rejections / double(trials) - 0.05) < 0.02);
}

TEST_CASE("chi-square tests") {
  const auto cdf = stats::TabulatedCdf::from_density([](double x) { return heat_kernel(x, 1.0); }, -9, 9);
  CHECK(cdf.mass() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(cdf(0.0) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(cdf.quantile(normal_cdf(1.0)) == doctest::Approx(1.0).epsilon(1e-6));
  const auto a = normals(5000, 0.0, 3);
  CHECK(*stats::chi2_binned(a, cdf, 20).p_value > 0.001);
  CHECK(*stats::chi2_binned(normals(5000, 0.2, 4), cdf, 20).p_value < 1e-6);
  CHECK(*stats::chi2_two_sample(a, normals(5000, 0.0, 5), 20).p_value > 0.001);

  // Independent standard normals against the product density.
  const auto b = normals(5000, 0.0, 6);
  auto product = [](double x, double y) { return heat_kernel(x, 1.0) * heat_kernel(y, 1.0); };
  CHECK(*stats::chi2_binned_2d(a, b, product, cdf, cdf, 6, false).p_value > 0.001);
  std::vector<double> c(a);
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = 0.6 * a[i] + 0.8 * b[i];
  CHECK(*stats::chi2_binned_2d(a, c, product, cdf, cdf, 6, false).p_value < 1e-6);
}

TEST_CASE("Wasserstein distance") {
  const auto a = normals(2000, 0.0, 7);
  const auto b = normals(1500, 0.0, 8);
  const auto c = normals(1000, 0.5, 9);
  CHECK(stats::wasserstein1(a, a) == 0.0);
  std::vector<double> shifted(a);
  for (auto& x : shifted) x += 0.7;
  CHECK(stats::wasserstein1(a, shifted) == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(stats::wasserstein1(a, c) <= stats::wasserstein1(a, b) + stats::wasserstein1(b, c) + 1e-12);
  CHECK(stats::wasserstein1(a, b) == doctest::Approx(stats::wasserstein1(b, a)).epsilon(1e-12));

  const auto cdf = stats::TabulatedCdf::from_density([](double x) { return heat_kernel(x, 1.0); }, -9, 9);
  const std::vector<double> point{0.0};
  // W1(delta_0, N(0, 1)) = E|Z| = sqrt(2 / pi).
  CHECK(stats::wasserstein1(point, cdf) == doctest::Approx(std::sqrt(2.0 / M_PI)).epsilon(1e-6));
  CHECK(stats::wasserstein1(a, cdf) < 0.05);
}

TEST_CASE("exponent fit and summaries") {
  const std::vector<double> xs{1, 2, 4, 8, 16};
  std::vector<double> ys;
  for (double x : xs) ys.push_back(3.0 * x * x);
  const auto fit = stats::fit_exponent(xs, ys);
  CHECK(fit.slope == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(std::exp(fit.intercept) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(fit.stderr_slope < 1e-10);

  const std::vector<double> v{3, 1, 2, 10};
  CHECK(stats::median(v) == 2.5);
  CHECK(stats::mean(v) == 4.0);
  CHECK(stats::variance(v) == doctest::Approx(50.0 / 3.0));
  const std::vector<double> w{30, 10, 20, 1000};
  CHECK(stats::spearman(v, w) == doctest::Approx(1.0));
  CHECK(stats::pearson(v, w) < 1.0);
}
