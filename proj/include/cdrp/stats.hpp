#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace cdrp::stats {

struct TestResult {
  double statistic = 0.0;
  std::optional<double> p_value;
  std::size_t n1 = 0;
  std::size_t n2 = 0;
};

/// A distribution function tabulated on a fine grid and linearly interpolated.
class TabulatedCdf {
 public:
  TabulatedCdf(std::vector<double> xs, std::vector<double> cdf);

  /// Integrates `density` over [lo, hi] cell by cell (15-point Kronrod rule per
  /// cell) and normalizes by the captured mass, which is kept in mass().
  static TabulatedCdf from_density(const std::function<double(double)>& density, double lo,
                                   double hi, int cells = 4000);

  double operator()(double x) const;
  double quantile(double p) const;
  double lo() const { return xs_.front(); }
  double hi() const { return xs_.back(); }
  double mass() const { return mass_; }

 private:
  std::vector<double> xs_;
  std::vector<double> cdf_;
  double mass_ = 1.0;
};

/// Two-sample Kolmogorov-Smirnov test; asymptotic p-value with the effective
/// sample size sqrt(ne) + 0.12 + 0.11 / sqrt(ne).
TestResult ks_two_sample(std::span<const double> a, std::span<const double> b);

/// One-sample Kolmogorov-Smirnov test against a continuous cdf.
TestResult ks_one_sample(std::span<const double> a, const std::function<double(double)>& cdf);

/// Chi-square goodness of fit of 1D samples in `bins` equal-probability bins
/// of the oracle cdf.
TestResult chi2_binned(std::span<const double> a, const TabulatedCdf& oracle, int bins);

/// Chi-square goodness of fit of paired samples against a 2D density.
/// Bin edges are equal-probability quantiles of the two marginal oracles;
/// cell probabilities come from 2D quadrature. With `ordered` set the density
/// is taken to vanish on y2 >= y1 and the quadrature is clipped to y2 < y1.
/// Cells with expected count below 5 are pooled into a single cell.
TestResult chi2_binned_2d(std::span<const double> a1, std::span<const double> a2,
                          const std::function<double(double, double)>& density,
                          const TabulatedCdf& marginal1, const TabulatedCdf& marginal2, int bins,
                          bool ordered);

/// Chi-square two-sample homogeneity test on `bins` bins from pooled quantiles.
TestResult chi2_two_sample(std::span<const double> a, std::span<const double> b, int bins);

/// Wasserstein-1 distance between two empirical measures, the integral of
/// |F_a - F_b|. For equal sizes this is the mean |sorted(a) - sorted(b)|.
double wasserstein1(std::span<const double> a, std::span<const double> b);

/// Wasserstein-1 distance between an empirical measure and a tabulated law.
double wasserstein1(std::span<const double> a, const TabulatedCdf& oracle);

struct ExponentFit {
  double slope = 0.0;
  double stderr_slope = 0.0;
  double intercept = 0.0;
};

/// Least-squares slope of log(ys) on log(xs).
ExponentFit fit_exponent(std::span<const double> xs, std::span<const double> ys);

double mean(std::span<const double> a);
double variance(std::span<const double> a);
double pearson(std::span<const double> a, std::span<const double> b);
double spearman(std::span<const double> a, std::span<const double> b);
double median(std::span<const double> a);

}  // namespace cdrp::stats
