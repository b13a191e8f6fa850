#include "cdrp/numerics.hpp"

#include <algorithm>
#include <array>
#include <queue>
#include <vector>

namespace cdrp {

double log_sum_exp(std::span<const double> values) {
  if (values.empty()) throw std::domain_error("log_sum_exp: empty input");
  const double m = *std::max_element(values.begin(), values.end());
  if (values.size() == 1 || m == -std::numeric_limits<double>::infinity()) return m;
  if (!std::isfinite(m)) return m;
  double acc = 0.0;
  for (double v : values) acc += std::exp(v - m);
  return m + std::log(acc);
}

namespace {

// Gauss-Kronrod 7/15 nodes and weights on [-1, 1].
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& other) const { return error < other.error; }
};

Segment gauss_kronrod(const std::function<double(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double kronrod = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    const double f1 = f(c - dx);
    const double f2 = f(c + dx);
    kronrod += kWgk[j] * (f1 + f2);
    if (j % 2 == 1) gauss += kWg[j / 2] * (f1 + f2);
  }
  return {a, b, kronrod * h, std::abs((kronrod - gauss) * h)};
}

}  // namespace

double quadrature_1d(const std::function<double(double)>& f, double a, double b,
                     const QuadratureOptions& options) {
  if (!std::isfinite(a) || !std::isfinite(b)) throw std::domain_error("quadrature_1d: infinite limits");
  if (!(a < b)) {
    if (a == b) return 0.0;
    throw std::domain_error("quadrature_1d: requires a < b");
  }
  std::priority_queue<Segment> pending;
  Segment first = gauss_kronrod(f, a, b);
  double total = first.value;
  double error = first.error;
  pending.push(first);
  int subdivisions = 0;
  while (error > std::max(options.abs_tol, options.rel_tol * std::abs(total))) {
    if (subdivisions >= options.max_subdivisions) {
      throw NumericError("quadrature_1d: subdivision budget exhausted", total, error);
    }
    Segment worst = pending.top();
    pending.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(worst.a < mid && mid < worst.b)) {
      throw NumericError("quadrature_1d: interval collapsed below machine precision", total, error);
    }
    Segment left = gauss_kronrod(f, worst.a, mid);
    Segment right = gauss_kronrod(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    pending.push(left);
    pending.push(right);
    ++subdivisions;
    if (subdivisions % 64 == 0) {
      // Re-sum to stop drift in the running totals.
      auto copy = pending;
      total = 0.0;
      error = 0.0;
      while (!copy.empty()) {
        total += copy.top().value;
        error += copy.top().error;
        copy.pop();
      }
    }
  }
  return total;
}

double quadrature_1d(const std::function<double(double)>& f, double a, double b, double tol) {
  QuadratureOptions options;
  options.abs_tol = tol;
  return quadrature_1d(f, a, b, options);
}

double quadrature_2d(const std::function<double(double, double)>& f, double x_lo, double x_hi,
                     const std::function<double(double)>& y_lo,
                     const std::function<double(double)>& y_hi, double tol) {
  const double inner_tol = 0.1 * tol / std::max(1.0, x_hi - x_lo);
  auto inner = [&](double x) {
    const double lo = y_lo(x);
    const double hi = y_hi(x);
    if (!(lo < hi)) return 0.0;
    return quadrature_1d([&](double y) { return f(x, y); }, lo, hi, inner_tol);
  };
  return quadrature_1d(inner, x_lo, x_hi, tol);
}

namespace {

double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int n = 0; n < 10000; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_q_fraction(double a, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double gamma_q(double a, double x) {
  if (!(a > 0.0) || x < 0.0) throw std::domain_error("gamma_q: requires a > 0, x >= 0");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_fraction(a, x);
}

double kolmogorov_survival(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 1.18) {
    // Jacobi theta form of the cdf converges fast for small lambda.
    const double y = -std::numbers::pi * std::numbers::pi / (8.0 * lambda * lambda);
    double cdf = 0.0;
    for (int k = 1; k <= 20; ++k) {
      const double m = 2.0 * k - 1.0;
      cdf += std::exp(m * m * y);
    }
    cdf *= std::sqrt(2.0 * std::numbers::pi) / lambda;
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }
  double q = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    q += sign * term;
    if (term < 1e-18) break;
    sign = -sign;
  }
  return std::clamp(2.0 * q, 0.0, 1.0);
}

}  // namespace cdrp
