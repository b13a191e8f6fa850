#include "cdrp/polymer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cdrp/dyson.hpp"
#include "cdrp/numerics.hpp"
#include "cdrp/parallel.hpp"
#include "cdrp/paths.hpp"
#include "cdrp/stats.hpp"

namespace cdrp {

namespace {

// Finite stand-in for log 0 inside the transfer loops: it survives
// additions and log-add-exp without producing NaN, and exp() of it is 0.
constexpr double kLogZero = -1e300;
constexpr double kLogZeroCut = -1e299;
const double kLogHalf = std::log(0.5);

Eigen::ArrayXd log_add_exp(const Eigen::ArrayXd& a, const Eigen::ArrayXd& b) {
  return a.max(b) + (-(a - b).abs()).exp().log1p();
}

// Row i of logZ_f from row i - 1.
void forward_step(const Eigen::ArrayXd& prev, const Eigen::Ref<const Eigen::ArrayXd>& omega, double beta,
                  Eigen::ArrayXd& next) {
  const Eigen::Index i = prev.size();
  next.resize(i + 1);
  next[0] = prev[0];
  next[i] = prev[i - 1];
  if (i > 1) next.segment(1, i - 1) = log_add_exp(prev.head(i - 1), prev.tail(i - 1));
  next += kLogHalf + beta * omega;
}

// Row i of logZ_b from row i + 1 and the environment of row i + 1.
void backward_step(const Eigen::ArrayXd& next, const Eigen::Ref<const Eigen::ArrayXd>& omega_next, double beta,
                   Eigen::ArrayXd& cur) {
  const Eigen::Index i = next.size() - 2;
  const Eigen::ArrayXd w = next + beta * omega_next;
  cur = log_add_exp(w.head(i + 1), w.tail(i + 1)) + kLogHalf;
}

Eigen::ArrayXd backward_terminal(int n, PolymerKind kind) {
  if (kind == PolymerKind::point_to_line) return Eigen::ArrayXd::Zero(n + 1);
  Eigen::ArrayXd row = Eigen::ArrayXd::Constant(n + 1, kLogZero);
  row[n / 2] = 0.0;
  return row;
}

void check_polymer(int n, double beta, PolymerKind kind) {
  if (n < 1) throw std::domain_error("polymer: n must be >= 1");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw std::domain_error("polymer: beta must be finite and >= 0");
  if (kind == PolymerKind::point_to_point && n % 2 != 0) {
    throw std::domain_error("polymer: point-to-point needs even n (the path ends at site 0)");
  }
}

int slice_of(int n, double p, PolymerKind kind) {
  const bool ok = kind == PolymerKind::point_to_point ? (p > 0.0 && p < 1.0) : (p > 0.0 && p <= 1.0);
  if (!ok) throw std::domain_error("quenched_density: slice fraction out of range");
  const int slice = static_cast<int>(std::floor(p * n));
  if (slice < 1 || (kind == PolymerKind::point_to_point && slice >= n)) {
    throw std::domain_error("quenched_density: slice is not an interior reachable time");
  }
  return slice;
}

QuenchedDensity combine(int slice, const Eigen::ArrayXd& fwd, const Eigen::ArrayXd& bwd) {
  QuenchedDensity q;
  q.slice = slice;
  std::vector<double> joint;
  for (Eigen::Index k = 0; k < fwd.size(); ++k) {
    const double v = fwd[k] + bwd[k];
    if (fwd[k] < kLogZeroCut || bwd[k] < kLogZeroCut) continue;
    q.sites.push_back(static_cast<int>(2 * k - slice));
    joint.push_back(v);
  }
  q.log_partition = log_sum_exp(joint);
  q.logf.resize(joint.size());
  for (std::size_t k = 0; k < joint.size(); ++k) {
    q.logf[k] = joint[k] - q.log_partition;
    if (q.logf[k] > q.logf[q.mode_index]) q.mode_index = k;
  }
  q.mode = q.sites[q.mode_index];
  return q;
}

Eigen::ArrayXd to_log_zero(Eigen::ArrayXd row) {
  return (row < kLogZeroCut).select(-std::numeric_limits<double>::infinity(), row);
}

}  // namespace

PolymerKind parse_polymer_kind(const std::string& s) {
  if (s == "point-to-point" || s == "p2p") return PolymerKind::point_to_point;
  if (s == "point-to-line" || s == "p2l") return PolymerKind::point_to_line;
  throw std::invalid_argument("unknown polymer kind '" + s + "' (point-to-point or point-to-line)");
}

std::string to_string(PolymerKind kind) {
  return kind == PolymerKind::point_to_point ? "point-to-point" : "point-to-line";
}

void disorder_row(const SeedSpec& seed, int i, Eigen::Ref<Eigen::ArrayXd> out) {
  RandomStream rng(seed.child(static_cast<std::uint64_t>(i)));
  for (Eigen::Index k = 0; k < out.size(); ++k) out[k] = rng.normal();
}

DisorderField DisorderField::sample(int n, const SeedSpec& seed, std::size_t budget_bytes) {
  if (n < 1) throw std::domain_error("DisorderField: n must be >= 1");
  const std::size_t count = static_cast<std::size_t>(n) * (n + 3) / 2;
  if (count * sizeof(double) > budget_bytes) {
    throw ResourceError("DisorderField: n = " + std::to_string(n) + " needs " +
                        std::to_string(count * sizeof(double) >> 20) + " MiB, above the budget of " +
                        std::to_string(budget_bytes >> 20) +
                        " MiB; use the streaming quenched_density overload instead");
  }
  DisorderField f;
  f.n_ = n;
  f.seed_ = seed;
  f.omega_.resize(count);
  for (int i = 1; i <= n; ++i) {
    Eigen::Map<Eigen::ArrayXd> row(f.omega_.data() + offset(i), i + 1);
    disorder_row(seed, i, row);
  }
  return f;
}

LogPartitionTable::LogPartitionTable(int n)
    : n_(n), data_(static_cast<std::size_t>(n + 1) * (n + 2) / 2, 0.0) {}

LogPartitionTable log_partition_forward(const DisorderField& env, double beta) {
  check_polymer(env.n(), beta, PolymerKind::point_to_line);
  LogPartitionTable t(env.n());
  Eigen::ArrayXd prev = Eigen::ArrayXd::Zero(1);
  Eigen::ArrayXd next;
  t.row(0) = prev;
  for (int i = 1; i <= env.n(); ++i) {
    forward_step(prev, env.row(i), beta, next);
    t.row(i) = next;
    prev.swap(next);
  }
  return t;
}

LogPartitionTable log_partition_backward(const DisorderField& env, double beta, PolymerKind kind) {
  const int n = env.n();
  check_polymer(n, beta, kind);
  LogPartitionTable t(n);
  Eigen::ArrayXd next = backward_terminal(n, kind);
  Eigen::ArrayXd cur;
  t.row(n) = to_log_zero(next);
  for (int i = n - 1; i >= 0; --i) {
    backward_step(next, env.row(i + 1), beta, cur);
    t.row(i) = to_log_zero(cur);
    next.swap(cur);
  }
  return t;
}

double QuenchedDensity::mass(int site) const {
  const auto it = std::lower_bound(sites.begin(), sites.end(), site);
  if (it == sites.end() || *it != site) return 0.0;
  return std::exp(logf[it - sites.begin()]);
}

QuenchedDensity quenched_density(const DisorderField& env, double beta, double p, PolymerKind kind) {
  const int n = env.n();
  check_polymer(n, beta, kind);
  const int slice = slice_of(n, p, kind);
  Eigen::ArrayXd fwd = Eigen::ArrayXd::Zero(1);
  Eigen::ArrayXd tmp;
  for (int i = 1; i <= slice; ++i) {
    forward_step(fwd, env.row(i), beta, tmp);
    fwd.swap(tmp);
  }
  Eigen::ArrayXd bwd = backward_terminal(n, kind);
  for (int i = n - 1; i >= slice; --i) {
    backward_step(bwd, env.row(i + 1), beta, tmp);
    bwd.swap(tmp);
  }
  return combine(slice, fwd, bwd);
}

QuenchedDensity quenched_density(const SeedSpec& seed, int n, double beta, double p, PolymerKind kind) {
  check_polymer(n, beta, kind);
  const int slice = slice_of(n, p, kind);
  Eigen::ArrayXd omega(n + 1);
  Eigen::ArrayXd fwd = Eigen::ArrayXd::Zero(1);
  Eigen::ArrayXd tmp;
  for (int i = 1; i <= slice; ++i) {
    disorder_row(seed, i, omega.head(i + 1));
    forward_step(fwd, omega.head(i + 1), beta, tmp);
    fwd.swap(tmp);
  }
  Eigen::ArrayXd bwd = backward_terminal(n, kind);
  for (int i = n - 1; i >= slice; --i) {
    disorder_row(seed, i + 1, omega.head(i + 2));
    backward_step(bwd, omega.head(i + 2), beta, tmp);
    bwd.swap(tmp);
  }
  return combine(slice, fwd, bwd);
}

Eigen::ArrayXd forward_final_row(const SeedSpec& seed, int n, double beta) {
  check_polymer(n, beta, PolymerKind::point_to_line);
  Eigen::ArrayXd omega(n + 1);
  Eigen::ArrayXd fwd = Eigen::ArrayXd::Zero(1);
  Eigen::ArrayXd tmp;
  for (int i = 1; i <= n; ++i) {
    disorder_row(seed, i, omega.head(i + 1));
    forward_step(fwd, omega.head(i + 1), beta, tmp);
    fwd.swap(tmp);
  }
  return fwd;
}

QuenchedDensity enumerate_quenched_density(const DisorderField& env, double beta, int slice,
                                           PolymerKind kind) {
  const int n = env.n();
  check_polymer(n, beta, kind);
  if (n > 20) throw std::domain_error("enumerate_quenched_density: n must be <= 20");
  if (slice < 1 || slice > n) throw std::domain_error("enumerate_quenched_density: bad slice");
  std::vector<std::vector<double>> terms(slice + 1);
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    int s = 0;
    int at_slice = 0;
    double w = -n * std::log(2.0);
    for (int i = 1; i <= n; ++i) {
      s += (mask >> (i - 1)) & 1u ? 1 : -1;
      w += beta * env.site(i, s);
      if (i == slice) at_slice = s;
    }
    if (kind == PolymerKind::point_to_point && s != 0) continue;
    terms[(at_slice + slice) / 2].push_back(w);
  }
  Eigen::ArrayXd fwd = Eigen::ArrayXd::Constant(slice + 1, kLogZero);
  for (int k = 0; k <= slice; ++k) {
    if (!terms[k].empty()) fwd[k] = log_sum_exp(terms[k]);
  }
  return combine(slice, fwd, Eigen::ArrayXd::Zero(slice + 1));
}

double intermediate_beta(int n, double kappa) { return kappa * std::pow(static_cast<double>(n), -0.25); }

double continuum_time(double kappa) { return 4.0 * std::pow(kappa, 4); }

double continuum_unit_sites(int n, double kappa) { return std::sqrt(static_cast<double>(n)) / (2.0 * kappa * kappa); }

namespace {

std::uint64_t batch_code(double kappa, PolymerKind kind, double p) {
  const auto k = static_cast<std::uint64_t>(std::llround(kappa * 1e6));
  const auto q = static_cast<std::uint64_t>(std::llround(p * 1e6));
  return splitmix64(k ^ splitmix64(q + (kind == PolymerKind::point_to_point ? 0 : 0x9e37)));
}

// Lattice sites for a continuum distance, rounded to an even count (sites at
// one time share parity), at least 2.
int even_sites(double units, double unit_sites) {
  const int g = 2 * static_cast<int>(std::llround(units * unit_sites / 2.0));
  return std::max(2, g);
}

void check_run(const PolymerRun& run, int min_replicas) {
  if (run.replicas < min_replicas) {
    throw std::domain_error("polymer experiment: needs at least " + std::to_string(min_replicas) + " replicas");
  }
  check_polymer(run.n, 0.0, run.kind);
}

const ReplicaBatch& find_batch(const std::vector<ReplicaBatch>& batches, double kappa, int replicas) {
  for (const auto& b : batches) {
    if (b.kappa == kappa && static_cast<int>(b.densities.size()) >= replicas) return b;
  }
  throw std::domain_error("polymer experiment: no replica batch for kappa " + std::to_string(kappa));
}

Json run_json(const PolymerRun& run) {
  return Json{{"n", run.n}, {"replicas", run.replicas}, {"p", run.p}, {"kind", to_string(run.kind)}};
}

}  // namespace

ReplicaBatch run_replicas(const PolymerRun& run, double kappa, const SeedSpec& seed) {
  check_run(run, 1);
  ReplicaBatch b;
  b.n = run.n;
  b.kappa = kappa;
  b.p = run.p;
  b.kind = run.kind;
  const SeedSpec base = seed.child(batch_code(kappa, run.kind, run.p));
  const double beta = intermediate_beta(run.n, kappa);
  b.densities = parallel_map(static_cast<std::size_t>(run.replicas), run.threads, [&](std::size_t r) {
    return quenched_density(base.child(r), run.n, beta, run.p, run.kind);
  });
  return b;
}

ExperimentReport localization_experiment(const LocalizationOptions& o, const std::vector<ReplicaBatch>& batches,
                                         const SeedSpec& seed) {
  check_run(o.run, 50);
  if (o.K_values.empty() || !std::is_sorted(o.K_values.begin(), o.K_values.end())) {
    throw std::domain_error("localization_experiment: K values must be non-empty and increasing");
  }
  ExperimentReport rep;
  rep.experiment = "localization";
  rep.seed = seed;
  rep.params = run_json(o.run);
  rep.params["kappas"] = o.kappas;
  rep.params["K_values"] = o.K_values;
  rep.params["tolerance"] = o.tolerance;
  Json per_kappa = Json::array();
  bool monotone = true;
  bool identity = true;
  for (double kappa : o.kappas) {
    const ReplicaBatch& b = find_batch(batches, kappa, o.run.replicas);
    const double unit = continuum_unit_sites(o.run.n, kappa);
    std::vector<std::vector<double>> outside(o.K_values.size());
    for (int r = 0; r < o.run.replicas; ++r) {
      const QuenchedDensity& q = b.densities[r];
      double prev = 1.0;
      for (std::size_t k = 0; k < o.K_values.size(); ++k) {
        const double radius = o.K_values[k] * unit;
        double inside = 0.0;
        for (std::size_t s = 0; s < q.sites.size(); ++s) {
          if (std::abs(q.sites[s] - q.mode) <= radius) inside += std::exp(q.logf[s]);
        }
        const double out = std::max(0.0, 1.0 - inside);
        if (out > prev + 1e-12) monotone = false;
        if (o.K_values[k] == 0.0 && std::abs(out - (1.0 - std::exp(q.logf[q.mode_index]))) > 1e-12) identity = false;
        prev = out;
        outside[k].push_back(out);
      }
    }
    Json medians = Json::array();
    for (std::size_t k = 0; k < o.K_values.size(); ++k) medians.push_back(stats::median(outside[k]));
    const double last = medians.back().get<double>();
    const bool ok = last < o.tolerance;
    rep.pass = rep.pass && ok;
    per_kappa.push_back(Json{{"kappa", kappa},
                             {"continuum_time", continuum_time(kappa)},
                             {"unit_sites", unit},
                             {"median_outside_mass", medians},
                             {"pass", ok}});
  }
  rep.statistics["per_kappa"] = per_kappa;
  rep.statistics["monotone_in_K"] = monotone;
  rep.statistics["K0_equals_one_minus_mode_mass"] = identity;
  rep.pass = rep.pass && monotone && identity;
  return rep;
}

ExperimentReport localization_experiment(const LocalizationOptions& o, const SeedSpec& seed) {
  std::vector<ReplicaBatch> batches;
  for (double kappa : o.kappas) batches.push_back(run_replicas(o.run, kappa, seed));
  return localization_experiment(o, batches, seed);
}

ExperimentReport favorite_point_scaling(const FavoritePointOptions& o, const std::vector<ReplicaBatch>& batches,
                                        const SeedSpec& seed) {
  check_run(o.run, 2);
  std::vector<double> kappas = o.kappas;
  std::sort(kappas.begin(), kappas.end());
  if (std::adjacent_find(kappas.begin(), kappas.end()) != kappas.end() || kappas.size() < 3) {
    throw std::domain_error("favorite_point_scaling: needs at least 3 distinct kappa values");
  }
  ExperimentReport rep;
  rep.experiment = "favorite_point_scaling";
  rep.seed = seed;
  rep.params = run_json(o.run);
  rep.params["kappas"] = o.kappas;
  rep.params["exponent_range"] = {o.exponent_lo, o.exponent_hi};
  rep.params["control_range"] = {o.control_lo, o.control_hi};

  // Control: without disorder the mode is pinned, so the diffusive
  // reference is the spread of the free walk at the same slice.
  const QuenchedDensity free = quenched_density(seed, o.run.n, 0.0, o.run.p, o.run.kind);
  double m1 = 0.0, m2 = 0.0;
  for (std::size_t s = 0; s < free.sites.size(); ++s) {
    const double w = std::exp(free.logf[s]);
    m1 += w * free.sites[s];
    m2 += w * free.sites[s] * free.sites[s];
  }
  const double free_sites_sd = std::sqrt(std::max(0.0, m2 - m1 * m1));

  std::vector<double> times, spreads, control, pooled;
  Json per_kappa = Json::array();
  for (double kappa : o.kappas) {
    const ReplicaBatch& b = find_batch(batches, kappa, o.run.replicas);
    const double unit = continuum_unit_sites(o.run.n, kappa);
    std::vector<double> modes;
    for (int r = 0; r < o.run.replicas; ++r) modes.push_back(b.densities[r].mode / unit);
    const double sd = std::sqrt(stats::variance(modes));
    if (!(sd > 0.0)) throw NumericError("favorite_point_scaling: mode spread is zero", 0.0, 0.0);
    for (double m : modes) pooled.push_back(m / sd);
    const double free_sd = free_sites_sd / unit;

    times.push_back(continuum_time(kappa));
    spreads.push_back(sd);
    control.push_back(free_sd);
    per_kappa.push_back(Json{{"kappa", kappa},
                             {"continuum_time", continuum_time(kappa)},
                             {"unit_sites", unit},
                             {"mode_mean", stats::mean(modes)},
                             {"mode_sd", sd},
                             {"free_walk_sd", free_sd}});
  }
  const auto fit = stats::fit_exponent(times, spreads);
  const auto cfit = stats::fit_exponent(times, control);
  std::vector<double> flipped(pooled.size());
  std::transform(pooled.begin(), pooled.end(), flipped.begin(), [](double v) { return -v; });
  const auto sym = stats::ks_two_sample(pooled, flipped);

  rep.statistics["per_kappa"] = per_kappa;
  rep.statistics["exponent"] = fit.slope;
  rep.statistics["exponent_stderr"] = fit.stderr_slope;
  rep.statistics["exponent_ci95"] = {fit.slope - 1.96 * fit.stderr_slope, fit.slope + 1.96 * fit.stderr_slope};
  rep.statistics["control_exponent"] = cfit.slope;
  rep.statistics["symmetry_ks"] = to_json(sym);
  const bool exp_ok = fit.slope >= o.exponent_lo && fit.slope <= o.exponent_hi;
  const bool ctl_ok = cfit.slope >= o.control_lo && cfit.slope <= o.control_hi;
  const bool sym_ok = *sym.p_value > 0.01;
  rep.statistics["exponent_pass"] = exp_ok;
  rep.statistics["control_pass"] = ctl_ok;
  rep.statistics["symmetry_pass"] = sym_ok;
  rep.pass = exp_ok && ctl_ok;
  return rep;
}

ExperimentReport favorite_point_scaling(const FavoritePointOptions& o, const SeedSpec& seed) {
  std::vector<ReplicaBatch> batches;
  for (double kappa : o.kappas) batches.push_back(run_replicas(o.run, kappa, seed));
  return favorite_point_scaling(o, batches, seed);
}

ProfileTable mode_profiles(const ReplicaBatch& batch, double window) {
  const double unit = continuum_unit_sites(batch.n, batch.kappa);
  const int reach = 2 * static_cast<int>(std::floor(window * unit / 2.0));
  ProfileTable t;
  for (int g = -reach; g <= reach; g += 2) t.offsets.push_back(g / unit);
  for (const QuenchedDensity& q : batch.densities) {
    std::vector<double> row;
    const double top = q.logf[q.mode_index];
    for (int g = -reach; g <= reach; g += 2) {
      const auto it = std::lower_bound(q.sites.begin(), q.sites.end(), q.mode + g);
      const bool hit = it != q.sites.end() && *it == q.mode + g;
      row.push_back(hit ? top - q.logf[it - q.sites.begin()] : std::numeric_limits<double>::quiet_NaN());
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

ExperimentReport bessel_shape_experiment(const BesselShapeOptions& o, const ReplicaBatch& batch,
                                         const SeedSpec& seed) {
  check_run(o.run, 2);
  if (!(o.distance > 0.0) || o.window < o.distance) {
    throw std::domain_error("bessel_shape_experiment: need 0 < distance <= window");
  }
  const double unit = continuum_unit_sites(o.run.n, o.kappa);
  const int g = even_sites(o.distance, unit);
  const int reach = o.run.kind == PolymerKind::point_to_point
                        ? std::min(static_cast<int>(o.run.p * o.run.n), o.run.n - static_cast<int>(o.run.p * o.run.n))
                        : static_cast<int>(o.run.p * o.run.n);
  if (o.window * unit > reach / 4.0) throw std::domain_error("bessel_shape_experiment: window exceeds lattice reach");

  std::vector<double> profile;
  bool nonneg = true;
  for (int r = 0; r < o.run.replicas; ++r) {
    const QuenchedDensity& q = batch.densities[r];
    const double top = q.logf[q.mode_index];
    for (int side : {-1, 1}) {
      const auto it = std::lower_bound(q.sites.begin(), q.sites.end(), q.mode + side * g);
      if (it == q.sites.end() || *it != q.mode + side * g) {
        throw std::domain_error("bessel_shape_experiment: profile site outside the support");
      }
      const double v = top - q.logf[it - q.sites.begin()];
      nonneg = nonneg && v >= 0.0;
      profile.push_back(v);
    }
  }

  // Reference: the two-sided Bessel marginal at the same distance, with
  // diffusion coefficient 2 inside the path and 1 at the endpoint.
  const bool endpoint = o.run.kind == PolymerKind::point_to_line && o.run.p == 1.0;
  const double x = g / unit;
  const Grid grid(Eigen::Vector2d(0.0, x));
  std::vector<double> reference;
  const SeedSpec ref_seed = seed.child(0x5eed);
  for (int k = 0; k < o.reference_samples; ++k) {
    RandomStream rng(ref_seed.child(k));
    if (endpoint) {
      reference.push_back(sample_bessel3(grid, 1.0, rng).values[1]);
    } else {
      const PairPath d = sample_dbm(grid, rng);
      reference.push_back(d.upper[1] - d.lower[1]);
    }
  }
  const double w1 = stats::wasserstein1(profile, reference);

  ExperimentReport rep;
  rep.experiment = endpoint ? "bessel_shape_endpoint" : "bessel_shape";
  rep.seed = seed;
  rep.params = run_json(o.run);
  rep.params["kappa"] = o.kappa;
  rep.params["distance"] = o.distance;
  rep.params["reference_samples"] = o.reference_samples;
  rep.params["tolerance"] = o.tolerance;
  rep.statistics["reference_law"] = endpoint ? "R1" : "R2";
  rep.statistics["unit_sites"] = unit;
  rep.statistics["offset_sites"] = g;
  rep.statistics["offset_units"] = x;
  rep.statistics["profile_mean"] = stats::mean(profile);
  rep.statistics["profile_median"] = stats::median(profile);
  rep.statistics["reference_mean"] = stats::mean(reference);
  rep.statistics["reference_median"] = stats::median(reference);
  rep.statistics["wasserstein1"] = w1;
  rep.statistics["profile_nonnegative"] = nonneg;
  rep.pass = nonneg && w1 < o.tolerance;
  return rep;
}

ExperimentReport bessel_shape_experiment(const BesselShapeOptions& o, const SeedSpec& seed) {
  const ReplicaBatch batch = run_replicas(o.run, o.kappa, seed);
  return bessel_shape_experiment(o, batch, seed);
}

ExperimentReport ergodicity_experiment(const ErgodicityOptions& o, const SeedSpec& seed) {
  check_run(o.run, 2);
  if (o.gaps.size() < 2 || !std::is_sorted(o.gaps.begin(), o.gaps.end()) || !(o.gaps.front() > 0.0)) {
    throw std::domain_error("ergodicity_experiment: needs >= 2 increasing positive gaps");
  }
  if (std::abs(o.gaps[1] - 2.0 * o.gaps[0]) > 1e-12) {
    throw std::domain_error("ergodicity_experiment: the second gap must double the first");
  }
  const int n = o.run.n;
  const double unit = continuum_unit_sites(n, o.kappa);
  std::vector<int> sites;
  for (double g : o.gaps) sites.push_back(even_sites(g, unit));
  if (sites.back() > n / 4) throw std::domain_error("ergodicity_experiment: gap exceeds lattice reach");

  const double beta = intermediate_beta(n, o.kappa);
  const SeedSpec base = seed.child(0xe460d1c);
  const auto rows = parallel_map(static_cast<std::size_t>(o.run.replicas), o.run.threads,
                                 [&](std::size_t r) { return forward_final_row(base.child(r), n, beta); });
  // Free-walk log probability of site j at time n, removed so increments
  // measure the disorder part only.
  auto free_log = [n](int j) {
    return std::lgamma(n + 1.0) - std::lgamma((n + j) / 2 + 1.0) - std::lgamma((n - j) / 2 + 1.0) -
           n * std::log(2.0);
  };
  const int centre = n / 2;
  std::vector<std::vector<double>> inc(sites.size());
  // One side per replica, alternating, so the increments are independent.
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const double base_val = rows[r][centre] - free_log(0);
    const int side = r % 2 ? -1 : 1;
    for (std::size_t k = 0; k < sites.size(); ++k) {
      const int h = side * sites[k] / 2;
      inc[k].push_back(rows[r][centre + h] - free_log(2 * h) - base_val);
    }
  }
  std::vector<double> vars, gaps_units;
  Json per_gap = Json::array();
  for (std::size_t k = 0; k < sites.size(); ++k) {
    const double m = stats::mean(inc[k]);
    const double v = stats::variance(inc[k]);
    vars.push_back(v);
    gaps_units.push_back(sites[k] / unit);
    per_gap.push_back(Json{{"gap_units", sites[k] / unit},
                           {"gap_sites", sites[k]},
                           {"mean", m},
                           {"mean_stderr", std::sqrt(v / inc[k].size())},
                           {"variance", v}});
  }
  const double m0 = stats::mean(inc[0]);
  const double s0 = std::sqrt(vars[0]);
  const auto ks = stats::ks_one_sample(inc[0], [m0, s0](double y) { return normal_cdf((y - m0) / s0); });
  const auto fit = stats::fit_exponent(gaps_units, vars);
  const double ratio = vars[1] / vars[0];

  ExperimentReport rep;
  rep.experiment = "ergodicity";
  rep.seed = seed;
  rep.params = run_json(o.run);
  rep.params["kappa"] = o.kappa;
  rep.params["gaps"] = o.gaps;
  rep.params["ratio_range"] = {o.ratio_lo, o.ratio_hi};
  rep.statistics["unit_sites"] = unit;
  rep.statistics["per_gap"] = per_gap;
  rep.statistics["normality_ks"] = to_json(ks);
  rep.statistics["variance_ratio"] = ratio;
  rep.statistics["variance_exponent"] = fit.slope;
  rep.statistics["variance_exponent_stderr"] = fit.stderr_slope;
  rep.pass = *ks.p_value > o.ks_level && ratio >= o.ratio_lo && ratio <= o.ratio_hi;
  return rep;
}

}  // namespace cdrp
