#include "cdrp/stats.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "cdrp/numerics.hpp"

namespace cdrp::stats {

namespace {

void require_nonempty(std::span<const double> a, const char* what) {
  if (a.empty()) throw std::domain_error(std::string(what) + ": empty sample");
}

std::vector<double> sorted_copy(std::span<const double> a) {
  std::vector<double> s(a.begin(), a.end());
  std::sort(s.begin(), s.end());
  return s;
}

double ks_p_value(double d, double ne) {
  const double root = std::sqrt(ne);
  return kolmogorov_survival((root + 0.12 + 0.11 / root) * d);
}

// Integral over [x0, x1] of |c - (l0 + (l1 - l0) (x - x0) / (x1 - x0))|.
double abs_linear_integral(double x0, double x1, double c, double l0, double l1) {
  const double w = x1 - x0;
  if (w <= 0.0) return 0.0;
  const double d0 = l0 - c;
  const double d1 = l1 - c;
  if ((d0 >= 0.0) == (d1 >= 0.0)) return 0.5 * w * std::abs(d0 + d1);
  const double z = w * d0 / (d0 - d1);
  return 0.5 * (z * std::abs(d0) + (w - z) * std::abs(d1));
}

}  // namespace

TabulatedCdf::TabulatedCdf(std::vector<double> xs, std::vector<double> cdf)
    : xs_(std::move(xs)), cdf_(std::move(cdf)) {
  if (xs_.size() < 2 || xs_.size() != cdf_.size()) throw std::domain_error("TabulatedCdf: bad table");
  for (std::size_t i = 1; i < xs_.size(); ++i) {
    if (!(xs_[i] > xs_[i - 1]) || cdf_[i] < cdf_[i - 1]) {
      throw std::domain_error("TabulatedCdf: table must be increasing");
    }
  }
}

TabulatedCdf TabulatedCdf::from_density(const std::function<double(double)>& density, double lo,
                                        double hi, int cells) {
  if (!(lo < hi) || cells < 1) throw std::domain_error("TabulatedCdf::from_density: bad range");
  // Kronrod 15-point rule on [-1, 1].
  static constexpr std::array<double, 8> x = {
      0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
      0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
      0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
      0.207784955007898467600689403773245, 0.0};
  static constexpr std::array<double, 8> w = {
      0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
      0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
      0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
      0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
  std::vector<double> xs(cells + 1);
  std::vector<double> cdf(cells + 1, 0.0);
  for (int i = 0; i <= cells; ++i) xs[i] = lo + (hi - lo) * i / cells;
  xs[cells] = hi;
  for (int i = 0; i < cells; ++i) {
    const double c = 0.5 * (xs[i] + xs[i + 1]);
    const double h = 0.5 * (xs[i + 1] - xs[i]);
    double acc = w[7] * density(c);
    for (int j = 0; j < 7; ++j) acc += w[j] * (density(c - h * x[j]) + density(c + h * x[j]));
    cdf[i + 1] = cdf[i] + std::max(0.0, acc * h);
  }
  const double mass = cdf.back();
  if (!(mass > 0.0)) throw std::domain_error("TabulatedCdf::from_density: zero mass");
  for (double& v : cdf) v /= mass;
  TabulatedCdf out(std::move(xs), std::move(cdf));
  out.mass_ = mass;
  return out;
}

double TabulatedCdf::operator()(double v) const {
  if (v <= xs_.front()) return cdf_.front();
  if (v >= xs_.back()) return cdf_.back();
  const auto it = std::upper_bound(xs_.begin(), xs_.end(), v);
  const std::size_t hi = it - xs_.begin();
  const double t = (v - xs_[hi - 1]) / (xs_[hi] - xs_[hi - 1]);
  return cdf_[hi - 1] + t * (cdf_[hi] - cdf_[hi - 1]);
}

double TabulatedCdf::quantile(double p) const {
  if (p <= cdf_.front()) return xs_.front();
  if (p >= cdf_.back()) return xs_.back();
  const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), p);
  const std::size_t hi = it - cdf_.begin();
  const double dc = cdf_[hi] - cdf_[hi - 1];
  const double t = dc > 0.0 ? (p - cdf_[hi - 1]) / dc : 0.0;
  return xs_[hi - 1] + t * (xs_[hi] - xs_[hi - 1]);
}

TestResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  require_nonempty(a, "ks_two_sample");
  require_nonempty(b, "ks_two_sample");
  const auto sa = sorted_copy(a);
  const auto sb = sorted_copy(b);
  const double na = static_cast<double>(sa.size());
  const double nb = static_cast<double>(sb.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < sa.size() && j < sb.size()) {
    const double v = std::min(sa[i], sb[j]);
    while (i < sa.size() && sa[i] == v) ++i;
    while (j < sb.size() && sb[j] == v) ++j;
    d = std::max(d, std::abs(i / na - j / nb));
  }
  return {d, ks_p_value(d, na * nb / (na + nb)), sa.size(), sb.size()};
}

TestResult ks_one_sample(std::span<const double> a, const std::function<double(double)>& cdf) {
  require_nonempty(a, "ks_one_sample");
  const auto s = sorted_copy(a);
  const double n = static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double f = cdf(s[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return {d, ks_p_value(d, n), s.size(), 0};
}

TestResult chi2_binned(std::span<const double> a, const TabulatedCdf& oracle, int bins) {
  require_nonempty(a, "chi2_binned");
  if (bins < 2) throw std::domain_error("chi2_binned: needs at least 2 bins");
  std::vector<double> edges;
  for (int k = 1; k < bins; ++k) edges.push_back(oracle.quantile(static_cast<double>(k) / bins));
  std::vector<double> counts(bins, 0.0);
  for (double v : a) counts[std::upper_bound(edges.begin(), edges.end(), v) - edges.begin()] += 1.0;
  const double expected = static_cast<double>(a.size()) / bins;
  double chi2 = 0.0;
  for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
  return {chi2, gamma_q(0.5 * (bins - 1), 0.5 * chi2), a.size(), 0};
}

TestResult chi2_binned_2d(std::span<const double> a1, std::span<const double> a2,
                          const std::function<double(double, double)>& density,
                          const TabulatedCdf& marginal1, const TabulatedCdf& marginal2, int bins,
                          bool ordered) {
  require_nonempty(a1, "chi2_binned_2d");
  if (a1.size() != a2.size()) throw std::domain_error("chi2_binned_2d: sample length mismatch");
  if (bins < 2) throw std::domain_error("chi2_binned_2d: needs at least 2 bins");
  std::vector<double> e1{marginal1.lo()};
  std::vector<double> e2{marginal2.lo()};
  for (int k = 1; k < bins; ++k) {
    e1.push_back(marginal1.quantile(static_cast<double>(k) / bins));
    e2.push_back(marginal2.quantile(static_cast<double>(k) / bins));
  }
  e1.push_back(marginal1.hi());
  e2.push_back(marginal2.hi());

  std::vector<double> observed(bins * bins, 0.0);
  auto bin_of = [bins](const std::vector<double>& e, double v) {
    const auto it = std::upper_bound(e.begin() + 1, e.end() - 1, v);
    return static_cast<int>(it - (e.begin() + 1));
  };
  for (std::size_t k = 0; k < a1.size(); ++k) {
    observed[bin_of(e1, a1[k]) * bins + bin_of(e2, a2[k])] += 1.0;
  }

  const double n = static_cast<double>(a1.size());
  double chi2 = 0.0;
  double pooled_obs = 0.0;
  double pooled_exp = 0.0;
  int cells = 0;
  for (int i = 0; i < bins; ++i) {
    for (int j = 0; j < bins; ++j) {
      const double y_lo = e2[j];
      const double y_hi = e2[j + 1];
      double prob = 0.0;
      if (!ordered || y_lo < e1[i + 1]) {
        prob = quadrature_2d(
            density, e1[i], e1[i + 1], [y_lo](double) { return y_lo; },
            [y_hi, ordered](double x) { return ordered ? std::min(y_hi, x) : y_hi; }, 1e-9);
      }
      const double expected = n * std::max(prob, 0.0);
      const double obs = observed[i * bins + j];
      if (expected < 5.0) {
        pooled_obs += obs;
        pooled_exp += expected;
      } else {
        chi2 += (obs - expected) * (obs - expected) / expected;
        ++cells;
      }
    }
  }
  if (pooled_exp > 0.0) {
    chi2 += (pooled_obs - pooled_exp) * (pooled_obs - pooled_exp) / pooled_exp;
    ++cells;
  }
  if (cells < 2) throw std::domain_error("chi2_binned_2d: too few populated cells");
  return {chi2, gamma_q(0.5 * (cells - 1), 0.5 * chi2), a1.size(), 0};
}

TestResult chi2_two_sample(std::span<const double> a, std::span<const double> b, int bins) {
  require_nonempty(a, "chi2_two_sample");
  require_nonempty(b, "chi2_two_sample");
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  std::sort(pooled.begin(), pooled.end());
  std::vector<double> edges;
  for (int k = 1; k < bins; ++k) edges.push_back(pooled[pooled.size() * k / bins]);
  std::vector<double> ca(bins, 0.0), cb(bins, 0.0);
  for (double v : a) ca[std::upper_bound(edges.begin(), edges.end(), v) - edges.begin()] += 1;
  for (double v : b) cb[std::upper_bound(edges.begin(), edges.end(), v) - edges.begin()] += 1;
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  double chi2 = 0.0;
  int used = 0;
  for (int k = 0; k < bins; ++k) {
    const double tot = ca[k] + cb[k];
    if (tot == 0.0) continue;
    const double ea = tot * na / (na + nb);
    const double eb = tot * nb / (na + nb);
    chi2 += (ca[k] - ea) * (ca[k] - ea) / ea + (cb[k] - eb) * (cb[k] - eb) / eb;
    ++used;
  }
  if (used < 2) return {0.0, 1.0, a.size(), b.size()};
  return {chi2, gamma_q(0.5 * (used - 1), 0.5 * chi2), a.size(), b.size()};
}

double wasserstein1(std::span<const double> a, std::span<const double> b) {
  require_nonempty(a, "wasserstein1");
  require_nonempty(b, "wasserstein1");
  const auto sa = sorted_copy(a);
  const auto sb = sorted_copy(b);
  if (sa.size() == sb.size()) {
    double acc = 0.0;
    for (std::size_t i = 0; i < sa.size(); ++i) acc += std::abs(sa[i] - sb[i]);
    return acc / static_cast<double>(sa.size());
  }
  const double na = static_cast<double>(sa.size());
  const double nb = static_cast<double>(sb.size());
  std::size_t i = 0, j = 0;
  double prev = std::min(sa.front(), sb.front());
  double acc = 0.0;
  while (i < sa.size() || j < sb.size()) {
    const double v = j == sb.size() || (i < sa.size() && sa[i] <= sb[j]) ? sa[i] : sb[j];
    acc += std::abs(i / na - j / nb) * (v - prev);
    prev = v;
    while (i < sa.size() && sa[i] == v) ++i;
    while (j < sb.size() && sb[j] == v) ++j;
  }
  return acc;
}

double wasserstein1(std::span<const double> a, const TabulatedCdf& oracle) {
  require_nonempty(a, "wasserstein1");
  const auto s = sorted_copy(a);
  const double n = static_cast<double>(s.size());
  const double lo = std::min(s.front(), oracle.lo());
  const double hi = std::max(s.back(), oracle.hi());
  // Breakpoints: samples plus the oracle table nodes via a fine uniform pass.
  std::vector<double> pts(s.begin(), s.end());
  const int nodes = 20000;
  for (int k = 0; k <= nodes; ++k) pts.push_back(oracle.lo() + (oracle.hi() - oracle.lo()) * k / nodes);
  pts.push_back(lo);
  pts.push_back(hi);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  double acc = 0.0;
  std::size_t idx = 0;
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    while (idx < s.size() && s[idx] <= pts[k]) ++idx;
    const double fn = idx / n;
    acc += abs_linear_integral(pts[k], pts[k + 1], fn, oracle(pts[k]), oracle(pts[k + 1]));
  }
  return acc;
}

ExponentFit fit_exponent(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2) throw std::domain_error("fit_exponent: needs >= 2 paired points");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!(xs[i] > 0.0) || !(ys[i] > 0.0)) throw std::domain_error("fit_exponent: values must be > 0");
    lx.push_back(std::log(xs[i]));
    ly.push_back(std::log(ys[i]));
  }
  const double mx = mean(lx);
  const double my = mean(ly);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw std::domain_error("fit_exponent: xs must not all be equal");
  ExponentFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (lx.size() > 2) {
    double rss = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      const double r = ly[i] - fit.intercept - fit.slope * lx[i];
      rss += r * r;
    }
    fit.stderr_slope = std::sqrt(rss / (lx.size() - 2) / sxx);
  }
  return fit;
}

double mean(std::span<const double> a) {
  require_nonempty(a, "mean");
  return std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(a.size());
}

double variance(std::span<const double> a) {
  if (a.size() < 2) throw std::domain_error("variance: needs at least 2 values");
  const double m = mean(a);
  double acc = 0.0;
  for (double v : a) acc += (v - m) * (v - m);
  return acc / static_cast<double>(a.size() - 1);
}

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) throw std::domain_error("pearson: needs paired samples");
  const double ma = mean(a);
  const double mb = mean(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (!(saa > 0.0) || !(sbb > 0.0)) throw std::domain_error("pearson: constant sample");
  return sab / std::sqrt(saa * sbb);
}

namespace {
std::vector<double> ranks(std::span<const double> a) {
  std::vector<std::size_t> order(a.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a[i] < a[j]; });
  std::vector<double> r(a.size());
  for (std::size_t k = 0; k < order.size();) {
    std::size_t e = k;
    while (e + 1 < order.size() && a[order[e + 1]] == a[order[k]]) ++e;
    const double avg = 0.5 * (k + e);
    for (std::size_t q = k; q <= e; ++q) r[order[q]] = avg;
    k = e + 1;
  }
  return r;
}
}  // namespace

double spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::domain_error("spearman: length mismatch");
  const auto ra = ranks(a);
  const auto rb = ranks(b);
  return pearson(ra, rb);
}

double median(std::span<const double> a) {
  require_nonempty(a, "median");
  auto s = sorted_copy(a);
  const std::size_t h = s.size() / 2;
  return s.size() % 2 ? s[h] : 0.5 * (s[h - 1] + s[h]);
}

}  // namespace cdrp::stats
