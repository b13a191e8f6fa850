#include <doctest.h>

#include <chrono>
#include <cmath>
#include <vector>

#include "cdrp/numerics.hpp"
#include "cdrp/polymer.hpp"
#include "cdrp/stats.hpp"

using namespace cdrp;

namespace {
double log_binomial_prob(int n, int j) {
  return std::lgamma(n + 1.0) - std::lgamma((n + j) / 2 + 1.0) - std::lgamma((n - j) / 2 + 1.0) - n * std::log(2.0);
}
}  // namespace

TEST_CASE("environment") {
  const auto a = DisorderField::sample(200, SeedSpec{5, 1});
  const auto b = DisorderField::sample(200, SeedSpec{5, 1});
  const auto c = DisorderField::sample(200, SeedSpec{5, 2});
  CHECK(a.values() == b.values());
  CHECK(a.values().size() == 200u * 203u / 2u);
  CHECK(std::abs(stats::pearson(a.values(), c.values())) < 0.01);

  const auto big = DisorderField::sample(1000, SeedSpec{6, 0});
  CHECK(std::abs(stats::mean(big.values())) < 0.01);
  CHECK(std::abs(stats::variance(big.values()) - 1.0) < 0.01);

  // A row regenerated on its own matches the stored one.
  Eigen::ArrayXd row(51);
  disorder_row(SeedSpec{5, 1}, 50, row);
  CHECK((row == a.row(50)).all());

  CHECK_THROWS_AS(DisorderField::sample(100000, SeedSpec{}), ResourceError);
}

TEST_CASE("free walk partition functions are binomial") {
  const auto env = DisorderField::sample(30, SeedSpec{1, 0});
  const auto fwd = log_partition_forward(env, 0.0);
  for (int j = -30; j <= 30; j += 2) {
    CHECK(std::exp(fwd.site(30, j)) == doctest::Approx(std::exp(log_binomial_prob(30, j))).epsilon(1e-12));
  }
  const auto q = quenched_density(env, 0.0, 1.0, PolymerKind::point_to_line);
  for (std::size_t k = 0; k < q.sites.size(); ++k) {
    CHECK(q.logf[k] == doctest::Approx(log_binomial_prob(30, q.sites[k])).epsilon(1e-12));
  }
}

TEST_CASE("two-step point-to-point density") {
  const auto env = DisorderField::sample(2, SeedSpec{2, 0});
  const double beta = 0.8;
  const auto q = quenched_density(env, beta, 0.5, PolymerKind::point_to_point);
  const double up = std::exp(beta * env.site(1, 1));
  const double down = std::exp(beta * env.site(1, -1));
  REQUIRE(q.sites == std::vector<int>{-1, 1});
  CHECK(q.mass(1) == doctest::Approx(up / (up + down)).epsilon(1e-14));
  CHECK(q.mass(-1) == doctest::Approx(down / (up + down)).epsilon(1e-14));
}

TEST_CASE("transfer matrix matches exhaustive enumeration") {
  for (int n : {6, 9, 12}) {
    const auto env = DisorderField::sample(n, SeedSpec{3, static_cast<std::uint64_t>(n)});
    const double beta = 0.9;
    for (auto kind : {PolymerKind::point_to_point, PolymerKind::point_to_line}) {
      if (kind == PolymerKind::point_to_point && n % 2) continue;
      const int last = kind == PolymerKind::point_to_point ? n - 1 : n;
      for (int slice = 1; slice <= last; ++slice) {
        const auto exact = enumerate_quenched_density(env, beta, slice, kind);
        const double p = slice == n ? 1.0 : (slice + 0.5) / n;
        const auto q = quenched_density(env, beta, p, kind);
        REQUIRE(q.slice == slice);
        REQUIRE(q.sites == exact.sites);
        CHECK(std::abs(q.log_partition - exact.log_partition) < 1e-10);
        for (std::size_t k = 0; k < q.sites.size(); ++k) CHECK(std::abs(q.logf[k] - exact.logf[k]) < 1e-10);
        CHECK(q.mode == exact.mode);
      }
    }
  }
  // The n = 6 total matches the forward table as well.
  const auto env = DisorderField::sample(6, SeedSpec{4, 0});
  const auto fwd = log_partition_forward(env, 0.7);
  const auto exact = enumerate_quenched_density(env, 0.7, 6, PolymerKind::point_to_line);
  std::vector<double> row(fwd.row(6).begin(), fwd.row(6).end());
  CHECK(std::abs(log_sum_exp(row) - exact.log_partition) < 1e-10);
}

TEST_CASE("discrete Chapman-Kolmogorov") {
  const int n = 400;
  const auto env = DisorderField::sample(n, SeedSpec{7, 0});
  const double beta = intermediate_beta(n, 4.0);
  for (auto kind : {PolymerKind::point_to_point, PolymerKind::point_to_line}) {
    const auto f = log_partition_forward(env, beta);
    const auto b = log_partition_backward(env, beta, kind);
    double lo = INFINITY, hi = -INFINITY;
    for (int i = 0; i <= n; ++i) {
      std::vector<double> terms;
      for (int k = 0; k <= i; ++k) terms.push_back(f.at(i, k) + b.at(i, k));
      const double total = log_sum_exp(terms);
      lo = std::min(lo, total);
      hi = std::max(hi, total);
    }
    CHECK(hi - lo < 1e-10);
  }
}

TEST_CASE("streaming and table densities agree") {
  const int n = 300;
  const SeedSpec seed{8, 0};
  const auto env = DisorderField::sample(n, seed);
  const double beta = intermediate_beta(n, 2.0);
  const auto a = quenched_density(env, beta, 0.5, PolymerKind::point_to_point);
  const auto b = quenched_density(seed, n, beta, 0.5, PolymerKind::point_to_point);
  CHECK(a.logf == b.logf);
  double total = 0;
  for (double v : a.logf) total += std::exp(v);
  CHECK(std::abs(total - 1.0) < 1e-12);
  const Eigen::ArrayXd last = forward_final_row(seed, n, beta);
  CHECK((last == log_partition_forward(env, beta).row(n)).all());
}

TEST_CASE("input validation") {
  const auto env = DisorderField::sample(7, SeedSpec{});
  CHECK_THROWS_AS(quenched_density(env, 0.5, 0.5, PolymerKind::point_to_point), std::domain_error);
  const auto even = DisorderField::sample(8, SeedSpec{});
  CHECK_THROWS_AS(quenched_density(even, 0.5, 1.0, PolymerKind::point_to_point), std::domain_error);
  CHECK_THROWS_AS(quenched_density(even, 0.5, 0.01, PolymerKind::point_to_line), std::domain_error);
  CHECK_THROWS_AS(parse_polymer_kind("sideways"), std::invalid_argument);
}

TEST_CASE("unit conventions") {
  CHECK(intermediate_beta(4096, 4.0) == doctest::Approx(0.5));
  CHECK(continuum_time(2.0) == doctest::Approx(64.0));
  CHECK(continuum_unit_sites(4096, 4.0) == doctest::Approx(2.0));
}

TEST_CASE("small experiments run and report") {
  PolymerRun run;
  run.n = 256;
  run.replicas = 60;
  LocalizationOptions lo;
  lo.run = run;
  lo.kappas = {2.0};
  lo.K_values = {0.0, 1.0, 4.0};
  const auto rep = localization_experiment(lo, SeedSpec{9, 0});
  CHECK(rep.statistics["monotone_in_K"].get<bool>());
  CHECK(rep.statistics["K0_equals_one_minus_mode_mass"].get<bool>());

  run.replicas = 10;
  ErgodicityOptions eo;
  eo.run = run;
  const auto erg = ergodicity_experiment(eo, SeedSpec{9, 1});
  CHECK(erg.statistics.contains("variance_ratio"));

  BesselShapeOptions bo;
  bo.run = run;
  bo.window = 2.0;
  bo.reference_samples = 1000;
  const auto shape = bessel_shape_experiment(bo, SeedSpec{9, 2});
  CHECK(shape.statistics["profile_nonnegative"].get<bool>());

  const auto batch = run_replicas(run, 2.0, SeedSpec{9, 3});
  const auto prof = mode_profiles(batch, 2.0);
  const std::size_t centre = prof.offsets.size() / 2;
  CHECK(prof.offsets[centre] == 0.0);
  for (const auto& row : prof.rows) {
    CHECK(row[centre] == 0.0);
    for (double v : row) CHECK((std::isnan(v) || v >= 0.0));
  }
}

TEST_CASE("replica timing at full size" * doctest::skip()) {
  const auto t0 = std::chrono::steady_clock::now();
  quenched_density(SeedSpec{1, 1}, 4096, intermediate_beta(4096, 4.0), 0.5, PolymerKind::point_to_point);
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  MESSAGE("seconds per replica: " << s);
}
