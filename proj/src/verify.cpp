#include "cdrp/verify.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "cdrp/decomp.hpp"
#include "cdrp/dyson.hpp"
#include "cdrp/nonint.hpp"
#include "cdrp/numerics.hpp"
#include "cdrp/parallel.hpp"
#include "cdrp/paths.hpp"
#include "cdrp/polymer.hpp"
#include "cdrp/stats.hpp"

namespace cdrp::verify {

Json Check::to_json() const {
  return Json{{"name", name},
              {"criterion", criterion},
              {"pass", pass},
              {"statistic", statistic},
              {"comparison", comparison},
              {"tolerance", tolerance},
              {"runtime_seconds", runtime_seconds},
              {"seed", cdrp::to_json(seed)},
              {"details", details}};
}

bool SuiteResult::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

Json SuiteResult::to_json() const {
  Json checks_json = Json::array();
  for (const auto& c : checks) checks_json.push_back(c.to_json());
  Json tol = Json::object();
  for (const auto& [k, v] : options.tolerances) tol[k] = v;
  return Json{{"suite", suite},
              {"seed", cdrp::to_json(options.seed)},
              {"threads", options.threads},
              {"sample_scale", options.sample_scale},
              {"tolerance_overrides", tol},
              {"pass", pass()},
              {"checks", checks_json}};
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"densities", "decompositions", "limits", "polymer", "all"};
  return names;
}

namespace {

using Clock = std::chrono::steady_clock;

// FNV-1a, so check streams do not depend on the standard library's hash.
std::uint64_t name_code(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

struct Context {
  const Options& options;
  std::vector<Check> checks;
  std::map<double, ReplicaBatch> batches;

  int scaled(int count, int floor = 100) const {
    return std::max(floor, static_cast<int>(std::lround(count * options.sample_scale)));
  }
};

class CheckBuilder {
 public:
  CheckBuilder(Context& ctx, Check& c) : ctx_(ctx), c_(c) {}
  const SeedSpec& seed() const { return c_.seed; }
  Json& details() { return c_.details; }

  void below(double stat, double tol) { compare(stat, tol, "<"); }
  void above(double stat, double tol) { compare(stat, tol, ">"); }
  void at_most(double stat, double tol) { compare(stat, tol, "<="); }
  void within(double stat, double lo, double hi) {
    c_.statistic = stat;
    c_.comparison = "in";
    c_.tolerance = Json::array({lo, hi});
    c_.pass = stat >= lo && stat <= hi;
  }
  // Extra conditions that must also hold.
  void require(bool ok) { c_.pass = c_.pass && ok; }

 private:
  void compare(double stat, double tol, const char* op) {
    const auto it = ctx_.options.tolerances.find(c_.name);
    if (it != ctx_.options.tolerances.end()) tol = it->second;
    c_.statistic = stat;
    c_.comparison = op;
    c_.tolerance = tol;
    const std::string o = op;
    c_.pass = o == "<" ? stat < tol : o == ">" ? stat > tol : stat <= tol;
  }
  Context& ctx_;
  Check& c_;
};

void run_check(Context& ctx, const std::string& name, int criterion, const std::function<void(CheckBuilder&)>& body) {
  Check c;
  c.name = name;
  c.criterion = criterion;
  c.seed = ctx.options.seed.child(name_code(name));
  CheckBuilder b(ctx, c);
  const auto t0 = Clock::now();
  try {
    body(b);
  } catch (const std::exception& e) {
    c.pass = false;
    c.statistic = std::numeric_limits<double>::quiet_NaN();
    c.details["error"] = e.what();
  }
  c.runtime_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  ctx.checks.push_back(std::move(c));
}

template <typename F>
std::vector<double> collect(const Context& ctx, int count, const SeedSpec& seed, F&& draw) {
  return parallel_map(static_cast<std::size_t>(count), ctx.options.threads, [&](std::size_t k) {
    RandomStream rng(seed.child(k));
    return draw(rng);
  });
}

double min_p(std::initializer_list<stats::TestResult> results) {
  double p = 1.0;
  for (const auto& r : results) p = std::min(p, *r.p_value);
  return p;
}

// Integral over {lo < y2 < y1 < hi}.
double integrate_ordered(const std::function<double(double, double)>& f, double lo, double hi) {
  return quadrature_2d(f, lo, hi, [lo](double) { return lo; }, [](double y1) { return y1; }, 1e-10);
}

std::vector<double> column(const std::vector<std::array<double, 2>>& v, int k) {
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& a : v) out.push_back(a[k]);
  return out;
}

// Marginal tables of a density on {y1 > y2}.
stats::TabulatedCdf upper_marginal(const std::function<double(double, double)>& f, double lo, double hi) {
  return stats::TabulatedCdf::from_density(
      [&](double a) { return quadrature_1d([&](double b) { return f(a, b); }, lo - 4.0, a); }, lo, hi, 400);
}
stats::TabulatedCdf lower_marginal(const std::function<double(double, double)>& f, double lo, double hi) {
  return stats::TabulatedCdf::from_density(
      [&](double b) { return quadrature_1d([&](double a) { return f(a, b); }, b, hi + 4.0); }, lo, hi, 400);
}

// ---------------------------------------------------------------- densities

void densities_suite(Context& ctx) {
  constexpr double kNormTol = 1e-6;
  run_check(ctx, "normalization_dbm_entrance", 1, [](CheckBuilder& b) {
    const double v = integrate_ordered([](double y1, double y2) { return dbm_entrance(1.0, y1, y2); }, -12, 12);
    b.details()["integral"] = v;
    b.below(std::abs(v - 1.0), kNormTol);
  });
  run_check(ctx, "normalization_nibm", 1, [](CheckBuilder& b) {
    const double v = integrate_ordered([](double y1, double y2) { return nibm_density(0.5, y1, y2); }, -10, 10);
    b.details()["integral"] = v;
    b.below(std::abs(v - 1.0), kNormTol);
  });
  run_check(ctx, "normalization_nibb", 1, [](CheckBuilder& b) {
    const double v = integrate_ordered(nibb_one_point(0.5, 1.0, -1.0), -10, 10);
    b.details()["integral"] = v;
    b.below(std::abs(v - 1.0), kNormTol);
  });
  run_check(ctx, "normalization_bessel_bridge", 1, [](CheckBuilder& b) {
    const double v = quadrature_1d(bessel_bridge_one_point(0.5, 1.0), 0.0, 12.0);
    b.details()["integral"] = v;
    b.below(std::abs(v - 1.0), kNormTol);
  });

  constexpr double kCkTol = 1e-5;
  run_check(ctx, "chapman_kolmogorov_dbm", 2, [](CheckBuilder& b) {
    RandomStream rng(b.seed());
    double worst = 0.0;
    Json tuples = Json::array();
    for (int k = 0; k < 3; ++k) {
      const double s = 0.2 + 0.8 * rng.uniform();
      const double u = s + 0.2 + 0.8 * rng.uniform();
      const double t = u + 0.2 + 0.8 * rng.uniform();
      const double x2 = rng.normal(), x1 = x2 + 0.1 + 1.9 * rng.uniform();
      const double y2 = rng.normal(), y1 = y2 + 0.1 + 1.9 * rng.uniform();
      const auto first = dbm_transition(s, u, x1, x2);
      const double lhs = integrate_ordered(
          [&](double w1, double w2) { return first(w1, w2) * dbm_transition(u, t, w1, w2)(y1, y2); }, -14, 14);
      const double rhs = dbm_transition(s, t, x1, x2)(y1, y2);
      worst = std::max(worst, std::abs(lhs - rhs));
      tuples.push_back(Json{{"s", s}, {"u", u}, {"t", t}, {"x", {x1, x2}}, {"y", {y1, y2}}, {"composed", lhs},
                            {"direct", rhs}});
    }
    b.details()["tuples"] = tuples;
    b.below(worst, kCkTol);
  });
  run_check(ctx, "chapman_kolmogorov_nibb", 2, [](CheckBuilder& b) {
    RandomStream rng(b.seed());
    double worst = 0.0;
    Json tuples = Json::array();
    for (int k = 0; k < 3; ++k) {
      const double s = 0.1 + 0.2 * rng.uniform();
      const double u = 0.4 + 0.2 * rng.uniform();
      const double t = 0.7 + 0.2 * rng.uniform();
      const double z2 = 0.5 * rng.normal(), z1 = z2 + 0.2 + 1.5 * rng.uniform();
      const double x2 = 0.5 * rng.normal(), x1 = x2 + 0.1 + rng.uniform();
      const double y2 = 0.5 * rng.normal(), y1 = y2 + 0.1 + rng.uniform();
      const auto first = nibb_transition(s, u, x1, x2, z1, z2);
      const double lhs = integrate_ordered(
          [&](double w1, double w2) { return first(w1, w2) * nibb_transition(u, t, w1, w2, z1, z2)(y1, y2); }, -10,
          10);
      const double rhs = nibb_transition(s, t, x1, x2, z1, z2)(y1, y2);
      worst = std::max(worst, std::abs(lhs - rhs));
      tuples.push_back(Json{{"s", s}, {"u", u}, {"t", t}, {"z", {z1, z2}}, {"x", {x1, x2}}, {"y", {y1, y2}},
                            {"composed", lhs}, {"direct", rhs}});
    }
    b.details()["tuples"] = tuples;
    b.below(worst, kCkTol);
  });
  run_check(ctx, "chapman_kolmogorov_bessel_bridge", 2, [](CheckBuilder& b) {
    RandomStream rng(b.seed());
    double worst = 0.0;
    Json tuples = Json::array();
    for (int k = 0; k < 3; ++k) {
      const double s = 0.1 + 0.2 * rng.uniform();
      const double u = 0.4 + 0.2 * rng.uniform();
      const double t = 0.7 + 0.2 * rng.uniform();
      const double a = 0.5 + 1.5 * rng.uniform();
      const double x = 0.2 + 1.3 * rng.uniform();
      const double y = 0.2 + 1.3 * rng.uniform();
      const auto first = bessel_bridge_transition(x, s, u, a);
      const double lhs =
          quadrature_1d([&](double w) { return first(w) * bessel_bridge_transition(w, u, t, a)(y); }, 0.0, 12.0);
      const double rhs = bessel_bridge_transition(x, s, t, a)(y);
      worst = std::max(worst, std::abs(lhs - rhs));
      tuples.push_back(Json{{"s", s}, {"u", u}, {"t", t}, {"a", a}, {"x", x}, {"y", y}, {"composed", lhs},
                            {"direct", rhs}});
    }
    b.details()["tuples"] = tuples;
    b.below(worst, kCkTol);
  });

  run_check(ctx, "harmonicity", 3, [](CheckBuilder& b) {
    RandomStream rng(b.seed());
    double worst = 0.0;
    Json tuples = Json::array();
    for (int k = 0; k < 5; ++k) {
      const double tau = 0.2 + 1.8 * rng.uniform();
      const double x2 = rng.normal(), x1 = x2 + 0.1 + 1.9 * rng.uniform();
      const double v = integrate_ordered(
          [&](double y1, double y2) { return (y1 - y2) * det2_heat(x1, x2, y1, y2, tau); }, -14, 14);
      worst = std::max(worst, std::abs(v - (x1 - x2)));
      tuples.push_back(Json{{"tau", tau}, {"x", {x1, x2}}, {"integral", v}});
    }
    b.details()["tuples"] = tuples;
    b.below(worst, 1e-6);
  });

  const int samples = ctx.scaled(100000);
  const Grid half(Eigen::Vector3d(0.0, 0.5, 1.0));
  run_check(ctx, "sampler_bessel_bridge", 4, [&](CheckBuilder& b) {
    const auto xs = collect(ctx, samples, b.seed(),
                            [&](RandomStream& rng) { return sample_bessel_bridge(half, 1.0, 1.0, rng).values[1]; });
    const auto cdf = stats::TabulatedCdf::from_density(bessel_bridge_one_point(0.5, 1.0), 0.0, 8.0);
    const auto ks = stats::ks_one_sample(xs, [&](double y) { return cdf(y); });
    b.details()["ks"] = to_json(ks);
    b.above(*ks.p_value, 0.01);
  });
  run_check(ctx, "sampler_nibb", 4, [&](CheckBuilder& b) {
    const auto pairs = parallel_map(static_cast<std::size_t>(samples), ctx.options.threads, [&](std::size_t k) {
      RandomStream rng(b.seed().child(k));
      const PairPath p = sample_nibb(half, 1.0, -1.0, rng);
      return std::array<double, 2>{p.upper[1], p.lower[1]};
    });
    const auto f = nibb_one_point(0.5, 1.0, -1.0);
    const auto m1 = upper_marginal(f, -6, 7);
    const auto m2 = lower_marginal(f, -7, 6);
    const auto k1 = stats::ks_one_sample(column(pairs, 0), [&](double y) { return m1(y); });
    const auto k2 = stats::ks_one_sample(column(pairs, 1), [&](double y) { return m2(y); });
    b.details()["ks_upper"] = to_json(k1);
    b.details()["ks_lower"] = to_json(k2);
    b.above(min_p({k1, k2}), 0.01);
  });

  // DBM at t = 1: marginals, joint law, and the sum/difference laws.
  std::vector<std::array<double, 2>> dbm_pairs;
  auto dbm_sample = [&](const SeedSpec& seed) {
    if (!dbm_pairs.empty()) return;
    dbm_pairs = parallel_map(static_cast<std::size_t>(samples), ctx.options.threads, [&](std::size_t k) {
      RandomStream rng(seed.child(k));
      const PairPath p = sample_dbm(half, rng);
      return std::array<double, 2>{p.upper[2], p.lower[2]};
    });
  };
  const SeedSpec dbm_seed = ctx.options.seed.child(name_code("dbm_samples"));
  const auto dm1 = stats::TabulatedCdf::from_density([](double y) { return dbm_entrance_marginal(1.0, y, 1); }, -8, 8);
  const auto dm2 = stats::TabulatedCdf::from_density([](double y) { return dbm_entrance_marginal(1.0, y, 2); }, -8, 8);
  run_check(ctx, "sampler_dbm_marginals", 4, [&](CheckBuilder& b) {
    dbm_sample(dbm_seed);
    b.details()["sample_seed"] = to_json(dbm_seed);
    const auto k1 = stats::ks_one_sample(column(dbm_pairs, 0), [&](double y) { return dm1(y); });
    const auto k2 = stats::ks_one_sample(column(dbm_pairs, 1), [&](double y) { return dm2(y); });
    b.details()["ks_upper"] = to_json(k1);
    b.details()["ks_lower"] = to_json(k2);
    b.above(min_p({k1, k2}), 0.01);
  });
  run_check(ctx, "sampler_dbm_joint", 4, [&](CheckBuilder& b) {
    dbm_sample(dbm_seed);
    b.details()["sample_seed"] = to_json(dbm_seed);
    const auto chi = stats::chi2_binned_2d(
        column(dbm_pairs, 0), column(dbm_pairs, 1), [](double y1, double y2) { return dbm_entrance(1.0, y1, y2); },
        dm1, dm2, 20, true);
    b.details()["chi2"] = to_json(chi);
    b.details()["bins"] = 20;
    b.above(*chi.p_value, 0.01);
  });
  run_check(ctx, "dbm_sum_difference", 5, [&](CheckBuilder& b) {
    dbm_sample(dbm_seed);
    b.details()["sample_seed"] = to_json(dbm_seed);
    std::vector<double> diff, sum;
    for (const auto& p : dbm_pairs) {
      diff.push_back(p[0] - p[1]);
      sum.push_back(p[0] + p[1]);
    }
    const auto kd = stats::ks_one_sample(diff, [](double y) { return bessel3_cdf(1.0, y, 2.0); });
    const auto ks = stats::ks_one_sample(sum, [](double y) { return normal_cdf(y / std::sqrt(2.0)); });
    b.details()["ks_difference_vs_R2"] = to_json(kd);
    b.details()["ks_sum_vs_normal"] = to_json(ks);
    b.above(min_p({kd, ks}), 0.01);
  });

  run_check(ctx, "pitman_identity", 6, [&](CheckBuilder& b) {
    // The running maximum is exact: each grid step contributes the maximum of
    // a Brownian bridge between its endpoint values.
    const Grid grid = Grid::uniform(0.0, 1.0, 64);
    const auto xs = collect(ctx, samples, b.seed(), [&](RandomStream& rng) {
      const Path w = sample_brownian_motion(grid, 0.0, 1.0, rng);
      double top = 0.0;
      for (Eigen::Index i = 1; i < grid.size(); ++i) {
        const double a = w.values[i - 1], c = w.values[i], h = grid[i] - grid[i - 1];
        top = std::max(top, 0.5 * (a + c + std::sqrt((c - a) * (c - a) - 2.0 * h * std::log(rng.uniform()))));
      }
      return 2.0 * top - w.values[grid.size() - 1];
    });
    const auto ks = stats::ks_one_sample(xs, [](double y) { return bessel3_cdf(1.0, y, 1.0); });
    b.details()["ks"] = to_json(ks);
    b.above(*ks.p_value, 0.01);
  });
}

// ----------------------------------------------------------- decompositions

double trapezoid(const Grid& g, const Eigen::VectorXd& v) {
  double acc = 0.0;
  for (Eigen::Index i = 1; i < g.size(); ++i) acc += 0.5 * (v[i] + v[i - 1]) * (g[i] - g[i - 1]);
  return acc;
}

// Quantile-cell label of each value, `cells` equal-count cells.
std::vector<int> quantile_cells(const std::vector<double>& v, int cells) {
  std::vector<double> s(v);
  std::sort(s.begin(), s.end());
  std::vector<double> edges;
  for (int k = 1; k < cells; ++k) edges.push_back(s[s.size() * k / cells]);
  std::vector<int> out;
  for (double x : v) out.push_back(static_cast<int>(std::upper_bound(edges.begin(), edges.end(), x) - edges.begin()));
  return out;
}

// Probability transforms of one side of a decomposition at its middle grid
// point, under the conditional law given the max data. With c2 absent the
// side is a coefficient-1 Bessel bridge; with c2 the pair splits into the
// Bessel bridge (c1 - c2) / sqrt 2 and the Brownian bridge (c1 + c2) / sqrt 2.
// Under the decomposition both transforms are uniform and independent of
// the max data.
struct SidePit {
  bool ok = false;
  double bessel = 0.0;
  double gauss = 0.0;
};

SidePit side_pit(const Eigen::VectorXd& times, const Eigen::VectorXd& c1, const Eigen::VectorXd* c2) {
  const Eigen::Index last = times.size() - 1;
  if (last < 2) return {};
  const Eigen::Index k = last / 2;
  const double len = times[last];
  const double s = times[k] / len;
  const double root = std::sqrt(len);
  double r = c1[k], r_end = c1[last], w = 0.0, w_end = 0.0;
  if (c2) {
    r = (c1[k] - (*c2)[k]) / std::numbers::sqrt2;
    r_end = (c1[last] - (*c2)[last]) / std::numbers::sqrt2;
    w = (c1[k] + (*c2)[k]) / std::numbers::sqrt2;
    w_end = (c1[last] + (*c2)[last]) / std::numbers::sqrt2;
  }
  if (!(r_end > 0.0)) return {};
  SidePit out;
  out.ok = true;
  out.bessel = quadrature_1d(bessel_bridge_one_point(s, r_end / root), 0.0, r / root);
  out.gauss = normal_cdf((w - s * w_end) / std::sqrt(len * s * (1.0 - s)));
  return out;
}

// Bonferroni-adjusted minimum of per-cell two-sample KS p-values.
double cellwise_ks(const std::vector<double>& orig, const std::vector<double>& synth, const std::vector<int>& cell,
                   int cells, Json& out) {
  double worst = 1.0;
  for (int c = 0; c < cells; ++c) {
    std::vector<double> a, s;
    for (std::size_t k = 0; k < orig.size(); ++k) {
      if (cell[k] == c) {
        a.push_back(orig[k]);
        s.push_back(synth[k]);
      }
    }
    const auto ks = stats::ks_two_sample(a, s);
    out.push_back(to_json(ks));
    worst = std::min(worst, *ks.p_value);
  }
  return worst;
}

void decompositions_suite(Context& ctx) {
  run_check(ctx, "decomposition_structure", 7, [&](CheckBuilder& b) {
    const int count = ctx.scaled(100000);
    const Grid grid = Grid::uniform(0.0, 1.0, 64);
    const Eigen::Index last = grid.size() - 1;
    // Each sample: one single-path and one pair extraction, then a round trip.
    const auto bad = parallel_map(static_cast<std::size_t>(count), ctx.options.threads, [&](std::size_t k) {
      RandomStream rng(b.seed().child(k));
      int v = 0;
      const double start = rng.normal(), end = rng.normal();
      const Path p = sample_brownian_bridge(grid, start, end, 1.0, rng);
      const Decomposition d = extract_single(p);
      const Eigen::Index m = d.max_data.index;
      const double top = d.max_data.values[0];
      if (d.left1[0] != 0.0 || d.right1[0] != 0.0) ++v;
      if (d.left1.minCoeff() < 0.0 || d.right1.minCoeff() < 0.0) ++v;
      if (d.left1[m] != top - start || d.right1[last - m] != top - end) ++v;
      if (m > 0 && p.values.head(m).maxCoeff() >= top) ++v;
      const Path s = synth_single(d.max_data, {grid, start, end, 1.0}, rng);
      const Decomposition ds = extract_single(s);
      if (ds.max_data.index != m || ds.max_data.values[0] != top || s.values[0] != start || s.values[last] != end) ++v;

      const Path q1 = sample_brownian_bridge(grid, 0.0, 0.0, 1.0, rng);
      const Path q2 = sample_brownian_bridge(grid, 0.0, 0.0, 1.0, rng);
      const Decomposition j = extract_joint(q1, q2);
      const Eigen::Index mj = j.max_data.index;
      const double b1 = j.max_data.values[0], b2 = j.max_data.values[1];
      if (j.left1[0] != 0.0 || j.left2[0] != 0.0 || j.right1[0] != 0.0 || j.right2[0] != 0.0) ++v;
      if ((j.left1 - j.left2).minCoeff() < 0.0 || (j.right1 - j.right2).minCoeff() < 0.0) ++v;
      if (j.left1[mj] != b1 || j.left2[mj] != -b2 || j.right1[last - mj] != b1 || j.right2[last - mj] != -b2) ++v;
      if (mj > 0 && mj < last) {
        const auto [s1, s2] = synth_joint(j.max_data, {grid, 0.0, 0.0, 0.0, 0.0}, rng);
        const Decomposition js = extract_joint(s1, s2);
        if (js.max_data.index != mj || js.max_data.values != j.max_data.values || s1.values[0] != 0.0 ||
            s2.values[last] != 0.0) {
          ++v;
        }
      }
      return v;
    });
    const double violations = std::accumulate(bad.begin(), bad.end(), 0.0);
    b.details()["extractions"] = 2 * count;
    b.at_most(violations, 0.0);
  });

  const int count = ctx.scaled(50000);
  // The originals are refined at their exact continuous argmax, so the
  // decomposition is the continuous one at any grid resolution.
  const Grid grid = Grid::uniform(0.0, 1.0, 256);
  struct Sample {
    double location = 0, height = 0, orig1 = 0, orig2 = 0, synth1 = 0, synth2 = 0;
    SidePit left, right;
  };
  std::vector<Sample> single, joint;
  const SeedSpec single_seed = ctx.options.seed.child(name_code("decomposition_single_samples"));
  const SeedSpec joint_seed = ctx.options.seed.child(name_code("decomposition_joint_samples"));

  run_check(ctx, "decomposition_conditional_single", 7, [&](CheckBuilder& b) {
    single = parallel_map(static_cast<std::size_t>(count), ctx.options.threads, [&](std::size_t k) {
      RandomStream rng(single_seed.child(k));
      const Path p = insert_continuous_max(sample_brownian_bridge(grid, 0.0, 0.0, 1.0, rng), rng);
      const Decomposition d = extract_single(p);
      const Path s = synth_single(d.max_data, {p.grid, 0.0, 0.0, 1.0}, rng);
      return Sample{d.max_data.location, d.max_data.values[0], trapezoid(p.grid, p.values), 0.0,
                    trapezoid(p.grid, s.values), 0.0, side_pit(d.left_times, d.left1, nullptr),
                    side_pit(d.right_times, d.right1, nullptr)};
    });
    std::vector<double> loc, height, orig, synth;
    for (const auto& s : single) {
      loc.push_back(s.location);
      height.push_back(s.height);
      orig.push_back(s.orig1);
      synth.push_back(s.synth1);
    }
    const auto cl = quantile_cells(loc, 2), ch = quantile_cells(height, 2);
    std::vector<int> cell;
    for (std::size_t k = 0; k < cl.size(); ++k) cell.push_back(2 * cl[k] + ch[k]);
    Json per_cell = Json::array();
    const double p = std::min(1.0, 4.0 * cellwise_ks(orig, synth, cell, 4, per_cell));
    b.details()["sample_seed"] = to_json(single_seed);
    b.details()["functional"] = "time integral of the path";
    b.details()["cells"] = "location halves x max-value halves";
    b.details()["per_cell_ks"] = per_cell;
    b.details()["grid_intervals"] = grid.size() - 1;
    b.details()["refinement"] = "exact continuous argmax inserted";
    b.above(p, 0.01);
  });

  run_check(ctx, "decomposition_conditional_joint", 7, [&](CheckBuilder& b) {
    joint = parallel_map(static_cast<std::size_t>(count), ctx.options.threads, [&](std::size_t k) {
      RandomStream rng(joint_seed.child(k));
      const Path b1 = sample_brownian_bridge(grid, 0.0, 0.0, 1.0, rng);
      const Path b2 = sample_brownian_bridge(grid, 0.0, 0.0, 1.0, rng);
      const auto [p1, p2] = insert_continuous_max(b1, b2, rng);
      const Decomposition d = extract_joint(p1, p2);
      const Grid& fine = p1.grid;
      Sample out{d.max_data.location, d.max_data.values.sum(), trapezoid(fine, p1.values), trapezoid(fine, p2.values),
                 0.0, 0.0, side_pit(d.left_times, d.left1, &d.left2), side_pit(d.right_times, d.right1, &d.right2)};
      if (d.max_data.index == 0 || d.max_data.index == fine.size() - 1) {
        out.synth1 = out.orig1;
        out.synth2 = out.orig2;
      } else {
        const auto [s1, s2] = synth_joint(d.max_data, {fine, 0.0, 0.0, 0.0, 0.0}, rng);
        out.synth1 = trapezoid(fine, s1.values);
        out.synth2 = trapezoid(fine, s2.values);
      }
      return out;
    });
    std::vector<double> loc, height, o1, o2, s1, s2;
    for (const auto& s : joint) {
      loc.push_back(s.location);
      height.push_back(s.height);
      o1.push_back(s.orig1);
      o2.push_back(s.orig2);
      s1.push_back(s.synth1);
      s2.push_back(s.synth2);
    }
    const auto cl = quantile_cells(loc, 2), ch = quantile_cells(height, 2);
    std::vector<int> cell;
    for (std::size_t k = 0; k < cl.size(); ++k) cell.push_back(2 * cl[k] + ch[k]);
    Json per_cell1 = Json::array(), per_cell2 = Json::array();
    const double p1 = cellwise_ks(o1, s1, cell, 4, per_cell1);
    const double p2 = cellwise_ks(o2, s2, cell, 4, per_cell2);
    b.details()["sample_seed"] = to_json(joint_seed);
    b.details()["functional"] = "time integral of each path";
    b.details()["cells"] = "location halves x halves of B1(M) + B2(M)";
    b.details()["per_cell_ks_path1"] = per_cell1;
    b.details()["per_cell_ks_path2"] = per_cell2;
    b.above(std::min(1.0, 8.0 * std::min(p1, p2)), 0.01);
  });

  run_check(ctx, "decomposition_independence", 7, [&](CheckBuilder& b) {
    if (single.empty() || joint.empty()) throw std::runtime_error("conditional samples unavailable");
    auto corr = [](const std::vector<Sample>& set, double SidePit::*field) {
      std::vector<double> l, r;
      for (const auto& s : set) {
        if (!s.left.ok || !s.right.ok) continue;
        l.push_back(s.left.*field);
        r.push_back(s.right.*field);
      }
      return stats::pearson(l, r);
    };
    const double r_single = corr(single, &SidePit::bessel);
    const double r_joint_bessel = corr(joint, &SidePit::bessel);
    const double r_joint_gauss = corr(joint, &SidePit::gauss);
    auto uniformity = [](const std::vector<Sample>& set, double SidePit::*field) {
      std::vector<double> u;
      for (const auto& s : set) {
        if (s.left.ok) u.push_back(s.left.*field);
        if (s.right.ok) u.push_back(s.right.*field);
      }
      return to_json(stats::ks_one_sample(u, [](double x) { return std::clamp(x, 0.0, 1.0); }));
    };
    b.details()["uniformity_single"] = uniformity(single, &SidePit::bessel);
    b.details()["uniformity_joint_bessel"] = uniformity(joint, &SidePit::bessel);
    b.details()["uniformity_joint_gaussian"] = uniformity(joint, &SidePit::gauss);
    b.details()["single_r"] = r_single;
    b.details()["joint_bessel_r"] = r_joint_bessel;
    b.details()["joint_gaussian_r"] = r_joint_gauss;
    b.details()["functional"] =
        "conditional probability transform of each side at its middle grid point given the max data";
    b.below(std::max({std::abs(r_single), std::abs(r_joint_bessel), std::abs(r_joint_gauss)}), 0.02);
  });
}

// ------------------------------------------------------------------- limits

void limits_suite(Context& ctx) {
  run_check(ctx, "diffusive_limit", 8, [&](CheckBuilder& b) {
    DiffusiveLimitOptions o;
    o.samples = ctx.scaled(o.samples);
    const auto rep = verify_diffusive_limit(o, b.seed());
    double worst = 0.0;
    for (const auto& p : rep.statistics["probes"]) {
      worst = std::max({worst, p["w1_upper"].get<double>(), p["w1_lower"].get<double>(),
                        p["w1_bessel"].get<double>()});
    }
    b.details() = rep.to_json();
    b.below(worst, o.tolerance);
  });

  run_check(ctx, "walk_marginals", 8, [&](CheckBuilder& b) {
    const int n = 400;
    const auto pairs =
        parallel_map(static_cast<std::size_t>(ctx.scaled(10000)), ctx.options.threads, [&](std::size_t k) {
          RandomStream rng(b.seed().child(k));
          const WalkPair w = sample_nonint_walks(n, rng);
          return std::array<double, 2>{w.upper[n] / std::sqrt(n), w.lower[n] / std::sqrt(n)};
        });
    const auto k1 = stats::ks_one_sample(column(pairs, 0), nibm_t1_upper_cdf);
    const auto k2 = stats::ks_one_sample(column(pairs, 1), nibm_t1_lower_cdf);
    b.details()["n"] = n;
    b.details()["ks_upper"] = to_json(k1);
    b.details()["ks_lower"] = to_json(k2);
    b.above(min_p({k1, k2}), 0.01);
  });

  run_check(ctx, "walk_acceptance_exponent", 8, [&](CheckBuilder& b) {
    const std::vector<double> ns{25, 100, 400, 1600};
    const int accepted = ctx.scaled(4000);
    std::vector<double> rates;
    Json per_n = Json::array();
    for (double nd : ns) {
      const int n = static_cast<int>(nd);
      const SeedSpec s = b.seed().child(n);
      const auto attempts = parallel_map(static_cast<std::size_t>(accepted), ctx.options.threads, [&](std::size_t k) {
        RandomStream rng(s.child(k));
        return static_cast<double>(sample_nonint_walks(n, rng).attempts);
      });
      const double rate = accepted / std::accumulate(attempts.begin(), attempts.end(), 0.0);
      rates.push_back(rate);
      per_n.push_back(Json{{"n", n}, {"rate", rate}, {"exact", nonint_walk_acceptance(n)}});
    }
    const auto fit = stats::fit_exponent(ns, rates);
    b.details()["per_n"] = per_n;
    b.details()["stderr"] = fit.stderr_slope;
    b.within(fit.slope, -0.6, -0.4);
  });

  run_check(ctx, "bessel_tail_integral", 9, [&](CheckBuilder& b) {
    BesselTailOptions o;
    o.samples = ctx.scaled(o.samples, 50);
    const auto rep = besselwd_check(o, b.seed());
    b.details() = rep.to_json();
    b.below(rep.statistics["gaps"].back()["median_gap"].get<double>(), o.tolerance);
    b.require(rep.statistics["all_positive"].get<bool>() && rep.statistics["monotone_in_horizon"].get<bool>());
  });
}

// ------------------------------------------------------------------ polymer

const ReplicaBatch& batch_for(Context& ctx, const PolymerRun& run, double kappa) {
  auto it = ctx.batches.find(kappa);
  if (it == ctx.batches.end()) {
    const SeedSpec seed = ctx.options.seed.child(name_code("polymer_replicas"));
    it = ctx.batches.emplace(kappa, run_replicas(run, kappa, seed)).first;
  }
  return it->second;
}

void polymer_suite(Context& ctx) {
  run_check(ctx, "polymer_enumeration", 10, [&](CheckBuilder& b) {
    double worst = 0.0;
    int compared = 0;
    for (int n : {5, 8, 12}) {
      const DisorderField env = DisorderField::sample(n, b.seed().child(n));
      for (auto kind : {PolymerKind::point_to_point, PolymerKind::point_to_line}) {
        if (kind == PolymerKind::point_to_point && n % 2) continue;
        const int top = kind == PolymerKind::point_to_point ? n - 1 : n;
        for (int slice = 1; slice <= top; ++slice) {
          const double p = slice == n ? 1.0 : (slice + 0.5) / n;
          const auto exact = enumerate_quenched_density(env, 1.0, slice, kind);
          const auto q = quenched_density(env, 1.0, p, kind);
          if (q.sites != exact.sites || q.mode != exact.mode) worst = std::numeric_limits<double>::infinity();
          worst = std::max(worst, std::abs(q.log_partition - exact.log_partition));
          for (std::size_t k = 0; k < q.sites.size() && k < exact.sites.size(); ++k) {
            worst = std::max(worst, std::abs(q.logf[k] - exact.logf[k]));
          }
          ++compared;
        }
      }
    }
    b.details()["beta"] = 1.0;
    b.details()["sizes"] = {5, 8, 12};
    b.details()["densities_compared"] = compared;
    b.below(worst, 1e-10);
  });

  run_check(ctx, "polymer_chapman_kolmogorov", 10, [&](CheckBuilder& b) {
    const int n = 4096;
    const double kappa = 4.0;
    const DisorderField env = DisorderField::sample(n, b.seed());
    const double beta = intermediate_beta(n, kappa);
    double worst = 0.0;
    Json per_kind = Json::array();
    for (auto kind : {PolymerKind::point_to_point, PolymerKind::point_to_line}) {
      const auto f = log_partition_forward(env, beta);
      const auto g = log_partition_backward(env, beta, kind);
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      for (int i = 0; i <= n; ++i) {
        const Eigen::ArrayXd terms = f.row(i) + g.row(i);
        const double m = terms.maxCoeff();
        const double total = m + std::log((terms - m).exp().sum());
        lo = std::min(lo, total);
        hi = std::max(hi, total);
      }
      worst = std::max(worst, hi - lo);
      per_kind.push_back(Json{{"kind", to_string(kind)}, {"log_partition", hi}, {"spread", hi - lo}});
    }
    b.details()["n"] = n;
    b.details()["kappa"] = kappa;
    b.details()["per_kind"] = per_kind;
    b.below(worst, 1e-10);
  });

  PolymerRun run;
  run.n = 4096;
  run.replicas = ctx.scaled(400, 50);
  run.threads = ctx.options.threads;
  const SeedSpec exp_seed = ctx.options.seed.child(name_code("polymer_replicas"));

  run_check(ctx, "polymer_localization", 11, [&](CheckBuilder& b) {
    LocalizationOptions o;
    o.run = run;
    o.run.replicas = ctx.scaled(200, 50);
    std::vector<ReplicaBatch> batches;
    for (double kappa : o.kappas) batches.push_back(batch_for(ctx, run, kappa));
    const auto rep = localization_experiment(o, batches, exp_seed);
    double worst = 0.0;
    for (const auto& k : rep.statistics["per_kappa"]) {
      worst = std::max(worst, k["median_outside_mass"].back().get<double>());
    }
    b.details() = rep.to_json();
    b.below(worst, o.tolerance);
    b.require(rep.statistics["monotone_in_K"].get<bool>() &&
              rep.statistics["K0_equals_one_minus_mode_mass"].get<bool>());
  });

  run_check(ctx, "polymer_favorite_point", 12, [&](CheckBuilder& b) {
    FavoritePointOptions o;
    o.run = run;
    std::vector<ReplicaBatch> batches;
    for (double kappa : o.kappas) batches.push_back(batch_for(ctx, run, kappa));
    const auto rep = favorite_point_scaling(o, batches, exp_seed);
    b.details() = rep.to_json();
    b.within(rep.statistics["exponent"].get<double>(), o.exponent_lo, o.exponent_hi);
    b.require(rep.statistics["control_pass"].get<bool>());
  });

  run_check(ctx, "polymer_bessel_shape", 13, [&](CheckBuilder& b) {
    BesselShapeOptions o;
    o.run = run;
    o.reference_samples = ctx.scaled(o.reference_samples);
    const auto rep = bessel_shape_experiment(o, batch_for(ctx, run, o.kappa), exp_seed);
    b.details() = rep.to_json();
    b.below(rep.statistics["wasserstein1"].get<double>(), o.tolerance);
    b.require(rep.statistics["profile_nonnegative"].get<bool>());
  });

  ExperimentReport ergodicity;
  run_check(ctx, "polymer_ergodicity_normality", 14, [&](CheckBuilder& b) {
    ErgodicityOptions o;
    o.run = run;
    ergodicity = ergodicity_experiment(o, exp_seed);
    b.details() = ergodicity.to_json();
    b.above(ergodicity.statistics["normality_ks"]["p_value"].get<double>(), o.ks_level);
  });
  run_check(ctx, "polymer_ergodicity_variance_ratio", 14, [&](CheckBuilder& b) {
    if (ergodicity.experiment.empty()) throw std::runtime_error("ergodicity experiment unavailable");
    ErgodicityOptions o;
    b.details()["source"] = "polymer_ergodicity_normality";
    b.within(ergodicity.statistics["variance_ratio"].get<double>(), o.ratio_lo, o.ratio_hi);
  });
}

}  // namespace

SuiteResult run_suite(const std::string& suite, const Options& options) {
  const auto& names = suite_names();
  if (std::find(names.begin(), names.end(), suite) == names.end()) {
    throw std::invalid_argument("unknown suite '" + suite + "'");
  }
  if (!(options.sample_scale > 0.0)) throw std::invalid_argument("sample_scale must be > 0");
  Context ctx{options, {}, {}};
  const bool all = suite == "all";
  if (all || suite == "densities") densities_suite(ctx);
  if (all || suite == "decompositions") decompositions_suite(ctx);
  if (all || suite == "limits") limits_suite(ctx);
  if (all || suite == "polymer") polymer_suite(ctx);
  return {suite, options, std::move(ctx.checks)};
}

}  // namespace cdrp::verify
