#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>

namespace cdrp {

/// Raised when an adaptive routine exhausts its budget; carries the best
/// estimate reached so far.
class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& what, double partial, double error_estimate)
      : std::runtime_error(what), partial_(partial), error_estimate_(error_estimate) {}

  double partial() const { return partial_; }
  double error_estimate() const { return error_estimate_; }

 private:
  double partial_;
  double error_estimate_;
};

namespace detail {
inline void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw std::domain_error(std::string(what) + " must be finite");
}
}  // namespace detail

/// Standard heat kernel p_t(y) = (2 pi t)^{-1/2} exp(-y^2 / 2t).
template <typename Scalar>
Scalar heat_kernel(Scalar y, Scalar t) {
  using std::exp;
  using std::sqrt;
  if (!(t > Scalar(0)) || !std::isfinite(static_cast<double>(t)))
    throw std::domain_error("heat_kernel: t must be finite and > 0");
  if (!std::isfinite(static_cast<double>(y))) throw std::domain_error("heat_kernel: y must be finite");
  const Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
  return exp(-y * y / (Scalar(2) * t)) / sqrt(two_pi * t);
}

/// log p_t(y); finite for any finite y.
template <typename Scalar>
Scalar log_heat_kernel(Scalar y, Scalar t) {
  using std::log;
  if (!(t > Scalar(0))) throw std::domain_error("log_heat_kernel: t must be > 0");
  const Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
  return -y * y / (Scalar(2) * t) - Scalar(0.5) * log(two_pi * t);
}

/// det [[p_s(x1-y1), p_s(x1-y2)], [p_s(x2-y1), p_s(x2-y2)]].
///
/// The two products differ by the factor exp(u), u = (x1-x2)(y1-y2)/s, so the
/// determinant is p_s(x1-y2) p_s(x2-y1) expm1(u). The larger product is always
/// the one factored out, which keeps the result free of cancellation and of
/// spurious underflow.
template <typename Scalar>
Scalar det2_heat(Scalar x1, Scalar x2, Scalar y1, Scalar y2, Scalar s) {
  using std::exp;
  using std::expm1;
  if (!(s > Scalar(0))) throw std::domain_error("det2_heat: s must be > 0");
  const Scalar u = (x1 - x2) * (y1 - y2) / s;
  if (u == Scalar(0)) return Scalar(0);
  if (u > Scalar(0))
    return -exp(log_heat_kernel(x1 - y1, s) + log_heat_kernel(x2 - y2, s)) * expm1(-u);
  return exp(log_heat_kernel(x1 - y2, s) + log_heat_kernel(x2 - y1, s)) * expm1(u);
}

/// p_s(x - y) - p_s(x + y): the heat kernel killed at the origin.
template <typename Scalar>
Scalar killed_heat_kernel(Scalar x, Scalar y, Scalar s) {
  using std::expm1;
  if (!(s > Scalar(0))) throw std::domain_error("killed_heat_kernel: s must be > 0");
  const Scalar u = Scalar(2) * x * y / s;
  if (u >= Scalar(0)) return -heat_kernel(x - y, s) * expm1(-u);
  return heat_kernel(x + y, s) * expm1(u);
}

/// Standard normal cdf.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// log(sum exp(v_i)) by max shift.
double log_sum_exp(std::span<const double> values);

/// log(exp(a) + exp(b)); either argument may be -inf.
inline double log_add_exp(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == -std::numeric_limits<double>::infinity()) return a;
  return a + std::log1p(std::exp(b - a));
}

struct QuadratureOptions {
  double abs_tol = 1e-10;
  double rel_tol = 0.0;
  int max_subdivisions = 4000;
};

/// Adaptive Gauss-Kronrod (7/15) quadrature of f over [a, b].
/// Throws NumericError with the partial estimate if the subdivision budget
/// runs out before the error estimate reaches the tolerance.
double quadrature_1d(const std::function<double(double)>& f, double a, double b,
                     double tol = 1e-10);
double quadrature_1d(const std::function<double(double)>& f, double a, double b,
                     const QuadratureOptions& options);

/// Iterated adaptive quadrature over {(x, y) : x in [x_lo, x_hi], y in [y_lo(x), y_hi(x)]}.
double quadrature_2d(const std::function<double(double, double)>& f, double x_lo, double x_hi,
                     const std::function<double(double)>& y_lo,
                     const std::function<double(double)>& y_hi, double tol = 1e-9);

/// Regularized upper incomplete gamma Q(a, x).
double gamma_q(double a, double x);

/// Survival function of the asymptotic Kolmogorov distribution, P(K > lambda).
double kolmogorov_survival(double lambda);

}  // namespace cdrp
