#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cdrp/report.hpp"
#include "cdrp/rng.hpp"

namespace cdrp {

/// Raised when a request would exceed the configured memory budget.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class PolymerKind { point_to_point, point_to_line };

PolymerKind parse_polymer_kind(const std::string& s);
std::string to_string(PolymerKind kind);

/// Row i (1 <= i <= n) of the environment holds the i + 1 sites reachable at
/// time i, j = 2k - i for k = 0..i. Row i is drawn from the stream
/// seed.child(i), so any row can be regenerated on its own.
void disorder_row(const SeedSpec& seed, int i, Eigen::Ref<Eigen::ArrayXd> out);

/// The full environment, packed row after row: n (n + 3) / 2 values.
class DisorderField {
 public:
  static constexpr std::size_t default_budget_bytes = std::size_t{2} << 30;

  /// Throws ResourceError if the field would exceed `budget_bytes`.
  static DisorderField sample(int n, const SeedSpec& seed,
                              std::size_t budget_bytes = default_budget_bytes);

  int n() const { return n_; }
  const SeedSpec& seed() const { return seed_; }
  /// omega at time i, site j = 2k - i.
  double at(int i, int k) const { return omega_[offset(i) + k]; }
  /// omega at time i and lattice site j (i + j even, |j| <= i).
  double site(int i, int j) const { return at(i, (i + j) / 2); }
  Eigen::Map<const Eigen::ArrayXd> row(int i) const {
    return {omega_.data() + offset(i), static_cast<Eigen::Index>(i + 1)};
  }
  const std::vector<double>& values() const { return omega_; }

 private:
  static std::size_t offset(int i) { return static_cast<std::size_t>(i - 1) * (i + 2) / 2; }
  int n_ = 0;
  SeedSpec seed_;
  std::vector<double> omega_;
};

/// Triangular table of log partition functions; row i holds sites
/// j = 2k - i, k = 0..i. Unreachable entries are -infinity.
class LogPartitionTable {
 public:
  explicit LogPartitionTable(int n);
  int n() const { return n_; }
  double& at(int i, int k) { return data_[offset(i) + k]; }
  double at(int i, int k) const { return data_[offset(i) + k]; }
  double site(int i, int j) const { return at(i, (i + j) / 2); }
  Eigen::Map<Eigen::ArrayXd> row(int i) { return {data_.data() + offset(i), i + 1}; }
  Eigen::Map<const Eigen::ArrayXd> row(int i) const { return {data_.data() + offset(i), i + 1}; }

 private:
  static std::size_t offset(int i) { return static_cast<std::size_t>(i) * (i + 1) / 2; }
  int n_;
  std::vector<double> data_;
};

/// logZ_f(i, j): log of the sum over paths from (0, 0) to (i, j) of
/// 2^{-i} exp(beta sum_{r=1..i} omega(r, S_r)).
LogPartitionTable log_partition_forward(const DisorderField& env, double beta);

/// logZ_b(i, j): the same sum over path pieces from (i, j) to time n, with
/// weights of times i + 1..n; pieces must end at site 0 for point-to-point.
LogPartitionTable log_partition_backward(const DisorderField& env, double beta, PolymerKind kind);

/// Density of the polymer position at one time slice under one environment.
struct QuenchedDensity {
  int slice = 0;
  std::vector<int> sites;     // reachable sites, increasing
  std::vector<double> logf;   // normalized log-probabilities
  int mode = 0;               // leftmost argmax, as a site
  std::size_t mode_index = 0; // position of the mode in `sites`
  double log_partition = 0.0; // log of the total partition function

  double mass(int site) const;
};

/// Slice floor(p n): 0 < p < 1 for point-to-point, 0 < p <= 1 for
/// point-to-line. Point-to-point needs n even.
QuenchedDensity quenched_density(const DisorderField& env, double beta, double p, PolymerKind kind);

/// Same density computed by streaming rows regenerated from `seed`, with
/// O(n) memory.
QuenchedDensity quenched_density(const SeedSpec& seed, int n, double beta, double p, PolymerKind kind);

/// Row n of logZ_f computed by streaming.
Eigen::ArrayXd forward_final_row(const SeedSpec& seed, int n, double beta);

/// Exhaustive enumeration over all 2^n paths (n <= 20): the log partition
/// function and the quenched density at slice i.
QuenchedDensity enumerate_quenched_density(const DisorderField& env, double beta, int slice,
                                           PolymerKind kind);

/// Intermediate-disorder scaling. beta = kappa n^{-1/4} maps to the
/// continuum polymer at time t = 4 kappa^4, and one continuum space unit is
/// sqrt(n) / (2 kappa^2) lattice sites.
double intermediate_beta(int n, double kappa);
double continuum_time(double kappa);
double continuum_unit_sites(int n, double kappa);

struct PolymerRun {
  int n = 4096;
  int replicas = 200;
  double p = 0.5;
  PolymerKind kind = PolymerKind::point_to_point;
  int threads = 1;
};

struct LocalizationOptions {
  PolymerRun run;
  std::vector<double> kappas{2.0, 4.0};
  std::vector<double> K_values{0.0, 1.0, 2.0, 4.0, 8.0, 16.0};  // continuum units
  double tolerance = 0.1;
};

struct FavoritePointOptions {
  PolymerRun run;
  std::vector<double> kappas{1.0, 2.0, 4.0, 8.0};
  double exponent_lo = 0.52;
  double exponent_hi = 0.82;
  double control_lo = 0.4;
  double control_hi = 0.6;
};

struct BesselShapeOptions {
  PolymerRun run;
  double kappa = 4.0;
  double distance = 1.0;  // continuum units from the mode
  double window = 4.0;    // profile half-width in continuum units
  int reference_samples = 100000;
  double tolerance = 0.15;
};

struct ErgodicityOptions {
  PolymerRun run;
  double kappa = 2.0;
  std::vector<double> gaps{1.0, 2.0, 4.0};  // continuum units
  double ks_level = 0.01;
  double ratio_lo = 1.7;
  double ratio_hi = 2.3;
};

/// Quenched densities of one replica batch, shared by the experiments that
/// read the same slice.
struct ReplicaBatch {
  int n = 0;
  double kappa = 0.0;
  double p = 0.5;
  PolymerKind kind = PolymerKind::point_to_point;
  std::vector<QuenchedDensity> densities;
};

/// Replica r uses the environment stream seed.child(r).
ReplicaBatch run_replicas(const PolymerRun& run, double kappa, const SeedSpec& seed);

ExperimentReport localization_experiment(const LocalizationOptions& o, const std::vector<ReplicaBatch>& batches,
                                         const SeedSpec& seed);
ExperimentReport localization_experiment(const LocalizationOptions& o, const SeedSpec& seed);

ExperimentReport favorite_point_scaling(const FavoritePointOptions& o, const std::vector<ReplicaBatch>& batches,
                                        const SeedSpec& seed);
ExperimentReport favorite_point_scaling(const FavoritePointOptions& o, const SeedSpec& seed);

/// Mode-centered profile -log(f(mode + x) / f(mode)) at x = -window..window
/// continuum units, one row per replica (NaN where unreachable).
struct ProfileTable {
  std::vector<double> offsets;  // continuum units
  std::vector<std::vector<double>> rows;
};
ProfileTable mode_profiles(const ReplicaBatch& batch, double window);

ExperimentReport bessel_shape_experiment(const BesselShapeOptions& o, const ReplicaBatch& batch,
                                         const SeedSpec& seed);
ExperimentReport bessel_shape_experiment(const BesselShapeOptions& o, const SeedSpec& seed);

ExperimentReport ergodicity_experiment(const ErgodicityOptions& o, const SeedSpec& seed);

}  // namespace cdrp
