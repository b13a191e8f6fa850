#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include "cdrp/dyson.hpp"
#include "cdrp/nonint.hpp"
#include "cdrp/path.hpp"
#include "cdrp/paths.hpp"
#include "cdrp/polymer.hpp"
#include "cdrp/report.hpp"
#include "cdrp/verify.hpp"

namespace fs = std::filesystem;
using cdrp::Json;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kUsage = 2;

// Flags given on the command line; unset ones fall back to the config file.
struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::string out;

  std::string object, grid;
  std::optional<double> sigma, x, y, endpoint, z1, z2;
  std::optional<int> steps;

  std::string suite;
  std::optional<double> sample_scale;

  std::optional<int> n, replicas;
  std::optional<double> p, kappa;
  std::string kind;
};

const std::set<std::string> kTopKeys{"seed", "threads", "out", "sample", "verify", "polymer"};
const std::set<std::string> kSampleKeys{"object", "grid", "sigma", "x", "y", "endpoint", "z1", "z2", "steps"};
const std::set<std::string> kVerifyKeys{"suite", "sample_scale", "tolerances"};
const std::set<std::string> kPolymerKeys{"n",      "replicas",      "p",        "kind",     "kappa",
                                         "kappas", "localization_kappas", "K_values", "window", "distance",
                                         "reference_samples", "ergodicity_kappa", "gaps"};

void reject_unknown(const Json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw UsageError(where + " must be a JSON object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) throw UsageError("unknown config key '" + key + "' in " + where);
  }
}

Json load_config(const std::string& path) {
  if (path.empty()) return Json::object();
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file '" + path + "'");
  Json cfg;
  try {
    cfg = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw UsageError(std::string("config is not valid JSON: ") + e.what());
  }
  reject_unknown(cfg, kTopKeys, "config");
  if (cfg.contains("sample")) reject_unknown(cfg["sample"], kSampleKeys, "config.sample");
  if (cfg.contains("verify")) reject_unknown(cfg["verify"], kVerifyKeys, "config.verify");
  if (cfg.contains("polymer")) reject_unknown(cfg["polymer"], kPolymerKeys, "config.polymer");
  return cfg;
}

template <typename T>
T pick(const std::optional<T>& flag, const Json& block, const char* key, T fallback) {
  if (flag) return *flag;
  if (block.contains(key)) {
    try {
      return block[key].get<T>();
    } catch (const Json::exception&) {
      throw UsageError(std::string("config key '") + key + "' has the wrong type");
    }
  }
  return fallback;
}

std::string pick_str(const std::string& flag, const Json& block, const char* key, const std::string& fallback) {
  if (!flag.empty()) return flag;
  if (block.contains(key)) {
    if (!block[key].is_string()) throw UsageError(std::string("config key '") + key + "' must be a string");
    return block[key].get<std::string>();
  }
  return fallback;
}

template <typename T>
std::vector<T> pick_list(const Json& block, const char* key, std::vector<T> fallback) {
  if (!block.contains(key)) return fallback;
  try {
    return block[key].get<std::vector<T>>();
  } catch (const Json::exception&) {
    throw UsageError(std::string("config key '") + key + "' must be a list of numbers");
  }
}

struct Common {
  std::uint64_t seed = 0;
  int threads = 1;
  fs::path out;
};

Common common(const Flags& f, const Json& cfg) {
  Common c;
  c.seed = pick<std::uint64_t>(f.seed, cfg, "seed", 0);
  c.threads = pick<int>(f.threads, cfg, "threads", 1);
  if (c.threads < 1) throw UsageError("threads must be >= 1");
  const char* env = std::getenv("CDRP_OUT_DIR");
  c.out = pick_str(f.out, cfg, "out", env && *env ? env : ".");
  return c;
}

std::ofstream open_out(const fs::path& dir, const std::string& name) {
  fs::create_directories(dir);
  std::ofstream out(dir / name, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
  return out;
}

void write_json(const fs::path& dir, const std::string& name, const Json& j) {
  auto out = open_out(dir, name);
  out << j.dump(2) << '\n';
}

// ------------------------------------------------------------------ sample

int cmd_sample(const Flags& f, const Json& cfg) {
  const Json block = cfg.value("sample", Json::object());
  const Common c = common(f, cfg);
  const std::string object = pick_str(f.object, block, "object", "");
  const std::string grid_spec = pick_str(f.grid, block, "grid", "0:1:1024");
  const double sigma = pick<double>(f.sigma, block, "sigma", 1.0);
  const double x = pick<double>(f.x, block, "x", 0.0);
  const double y = pick<double>(f.y, block, "y", 0.0);
  const double endpoint = pick<double>(f.endpoint, block, "endpoint", 1.0);
  const double z1 = pick<double>(f.z1, block, "z1", 1.0);
  const double z2 = pick<double>(f.z2, block, "z2", -1.0);
  const int steps = pick<int>(f.steps, block, "steps", 400);

  static const std::set<std::string> objects{"brownian_motion", "brownian_bridge", "meander", "bessel3",
                                             "bessel_bridge",   "nibb",            "dbm",     "walks"};
  if (!objects.count(object)) {
    std::string list;
    for (const auto& o : objects) list += (list.empty() ? "" : ", ") + o;
    throw UsageError("invalid object kind '" + object + "' (expected one of: " + list + ")");
  }
  cdrp::Grid grid = [&] {
    try {
      return cdrp::Grid::parse(grid_spec);
    } catch (const std::exception& e) {
      throw UsageError(std::string("invalid grid: ") + e.what());
    }
  }();
  if (!(sigma > 0.0)) throw UsageError("sigma must be > 0");
  const bool from_zero = object == "bessel3" || object == "dbm";
  if (from_zero && grid.origin() != 0.0) throw UsageError(object + " needs a grid starting at 0");
  if (object == "bessel_bridge" && !(endpoint > 0.0)) throw UsageError("bessel_bridge needs endpoint > 0");
  if (object == "nibb" && !(z1 > z2)) throw UsageError("nibb needs z1 > z2 (non-intersecting endpoints)");
  if (object == "walks" && steps < 1) throw UsageError("walks needs steps >= 1");

  cdrp::RandomStream rng(cdrp::SeedSpec{c.seed, 0});
  auto out = open_out(c.out, "sample_" + object + ".csv");
  if (object == "brownian_motion") {
    cdrp::write_csv(out, cdrp::sample_brownian_motion(grid, x, sigma, rng));
  } else if (object == "brownian_bridge") {
    cdrp::write_csv(out, cdrp::sample_brownian_bridge(grid, x, y, sigma, rng));
  } else if (object == "meander") {
    cdrp::write_csv(out, cdrp::sample_meander(grid, rng));
  } else if (object == "bessel3") {
    cdrp::write_csv(out, cdrp::sample_bessel3(grid, sigma, rng));
  } else if (object == "bessel_bridge") {
    cdrp::write_csv(out, cdrp::sample_bessel_bridge(grid, endpoint, sigma, rng));
  } else if (object == "nibb") {
    cdrp::write_csv(out, cdrp::sample_nibb(grid, z1, z2, rng));
  } else if (object == "dbm") {
    cdrp::write_csv(out, cdrp::sample_dbm(grid, rng));
  } else {
    cdrp::write_csv(out, cdrp::sample_nonint_walks(steps, rng).rescaled());
  }
  std::cout << "wrote " << (c.out / ("sample_" + object + ".csv")).string() << '\n';
  return kPass;
}

// ------------------------------------------------------------------ verify

int cmd_verify(const Flags& f, const Json& cfg) {
  const Json block = cfg.value("verify", Json::object());
  const Common c = common(f, cfg);
  const std::string suite = pick_str(f.suite, block, "suite", "all");
  const auto& names = cdrp::verify::suite_names();
  if (std::find(names.begin(), names.end(), suite) == names.end()) {
    throw UsageError("unknown suite '" + suite + "' (expected densities, decompositions, limits, polymer or all)");
  }
  cdrp::verify::Options o;
  o.seed = cdrp::SeedSpec{c.seed, 0};
  o.threads = c.threads;
  o.sample_scale = pick<double>(f.sample_scale, block, "sample_scale", 1.0);
  if (!(o.sample_scale > 0.0)) throw UsageError("sample_scale must be > 0");
  if (block.contains("tolerances")) {
    if (!block["tolerances"].is_object()) throw UsageError("config key 'tolerances' must be an object");
    for (const auto& [k, v] : block["tolerances"].items()) {
      if (!v.is_number()) throw UsageError("tolerance for '" + k + "' must be a number");
      o.tolerances[k] = v.get<double>();
    }
  }

  const auto result = cdrp::verify::run_suite(suite, o);
  Json j = result.to_json();
  j["config"] = cfg;
  write_json(c.out, "verify_" + suite + ".json", j);
  for (const auto& ch : result.checks) {
    std::ostringstream tol;
    tol << ch.tolerance.dump();
    std::cout << (ch.pass ? "PASS " : "FAIL ") << ch.name << "  " << ch.statistic << ' ' << ch.comparison << ' '
              << tol.str() << "  (" << ch.runtime_seconds << " s)\n";
  }
  std::cout << (result.pass() ? "suite passed" : "suite FAILED") << '\n';
  return result.pass() ? kPass : kFail;
}

// ----------------------------------------------------------------- polymer

int cmd_polymer(const Flags& f, const Json& cfg) {
  const Json block = cfg.value("polymer", Json::object());
  const Common c = common(f, cfg);
  cdrp::PolymerRun run;
  run.n = pick<int>(f.n, block, "n", 4096);
  run.replicas = pick<int>(f.replicas, block, "replicas", 200);
  run.p = pick<double>(f.p, block, "p", 0.5);
  try {
    run.kind = cdrp::parse_polymer_kind(pick_str(f.kind, block, "kind", "point-to-point"));
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
  run.threads = c.threads;
  if (run.n < 2) throw UsageError("n must be >= 2");
  if (run.kind == cdrp::PolymerKind::point_to_point && run.n % 2) throw UsageError("point-to-point needs an even n");
  if (run.replicas < 1) throw UsageError("replicas must be >= 1");
  if (!(run.p > 0.0 && run.p <= 1.0)) throw UsageError("p must lie in (0, 1]");
  if (run.kind == cdrp::PolymerKind::point_to_point && run.p >= 1.0) {
    throw UsageError("point-to-point needs p < 1");
  }

  std::optional<double> kappa = f.kappa;
  if (!kappa && block.contains("kappa")) kappa = pick<double>({}, block, "kappa", 4.0);
  if (kappa && !(*kappa > 0.0)) throw UsageError("kappa must be > 0");

  cdrp::LocalizationOptions lo;
  lo.run = run;
  lo.kappas = pick_list<double>(block, "localization_kappas", kappa ? std::vector<double>{*kappa} : lo.kappas);
  lo.K_values = pick_list<double>(block, "K_values", lo.K_values);
  cdrp::FavoritePointOptions fo;
  fo.run = run;
  fo.kappas = pick_list<double>(block, "kappas", fo.kappas);
  cdrp::BesselShapeOptions bo;
  bo.run = run;
  bo.kappa = kappa.value_or(bo.kappa);
  bo.window = pick<double>({}, block, "window", bo.window);
  bo.distance = pick<double>({}, block, "distance", bo.distance);
  bo.reference_samples = pick<int>({}, block, "reference_samples", bo.reference_samples);
  cdrp::ErgodicityOptions eo;
  eo.run = run;
  eo.kappa = pick<double>({}, block, "ergodicity_kappa", kappa.value_or(eo.kappa));
  eo.gaps = pick_list<double>(block, "gaps", eo.gaps);
  for (const auto* list : {&lo.kappas, &fo.kappas}) {
    for (double k : *list) {
      if (!(k > 0.0)) throw UsageError("kappa values must be > 0");
    }
  }
  if (fo.kappas.size() < 3) throw UsageError("kappas needs at least 3 values for the exponent fit");
  if (run.replicas < 50) throw UsageError("replicas must be >= 50 for the localization statistics");

  const cdrp::SeedSpec seed{c.seed, 0};
  std::map<double, cdrp::ReplicaBatch> batches;
  auto batch = [&](double k) -> const cdrp::ReplicaBatch& {
    auto it = batches.find(k);
    if (it == batches.end()) it = batches.emplace(k, cdrp::run_replicas(run, k, seed)).first;
    return it->second;
  };
  auto gather = [&](const std::vector<double>& ks) {
    std::vector<cdrp::ReplicaBatch> out;
    for (double k : ks) out.push_back(batch(k));
    return out;
  };

  bool pass = true;
  auto emit = [&](const std::string& name, const cdrp::ExperimentReport& rep) {
    Json j = rep.to_json();
    j["config"] = cfg;
    write_json(c.out, name + ".json", j);
    std::cout << (rep.pass ? "PASS " : "FAIL ") << name << '\n';
    pass = pass && rep.pass;
  };
  emit("polymer_localization", cdrp::localization_experiment(lo, gather(lo.kappas), seed));
  emit("polymer_favorite_point", cdrp::favorite_point_scaling(fo, gather(fo.kappas), seed));
  emit("polymer_bessel_shape", cdrp::bessel_shape_experiment(bo, batch(bo.kappa), seed));
  emit("polymer_ergodicity", cdrp::ergodicity_experiment(eo, seed));

  for (const auto& [k, b] : batches) {
    const auto table = cdrp::mode_profiles(b, bo.window);
    std::ostringstream name;
    name << "profiles_kappa_" << cdrp::format_double(k) << ".csv";
    auto out = open_out(c.out, name.str());
    out << "replica,offset,profile\n";
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      for (std::size_t i = 0; i < table.offsets.size(); ++i) {
        out << r << ',' << cdrp::format_double(table.offsets[i]) << ',' << cdrp::format_double(table.rows[r][i])
            << '\n';
      }
    }
  }
  return pass ? kPass : kFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Constrained Brownian objects and directed polymer localization experiments"};
  app.require_subcommand(1);
  Flags f;
  app.add_option("--config", f.config, "JSON config file");
  app.add_option("--seed", f.seed, "Master seed");
  app.add_option("--threads", f.threads, "Worker threads");
  app.add_option("--out", f.out, "Output directory (default: $CDRP_OUT_DIR or .)");

  auto* sample = app.add_subcommand("sample", "Sample a path object to CSV")->fallthrough();
  sample->add_option("--object", f.object,
                     "brownian_motion, brownian_bridge, meander, bessel3, bessel_bridge, nibb, dbm, walks");
  sample->add_option("--grid", f.grid, "Grid a:b:N (N intervals)");
  sample->add_option("--sigma", f.sigma, "Diffusion coefficient");
  sample->add_option("--x", f.x, "Start value");
  sample->add_option("--y", f.y, "Bridge end value");
  sample->add_option("--endpoint", f.endpoint, "Bessel bridge end value");
  sample->add_option("--z1", f.z1, "Upper end value of a non-intersecting bridge");
  sample->add_option("--z2", f.z2, "Lower end value of a non-intersecting bridge");
  sample->add_option("--steps", f.steps, "Walk length");

  auto* verify = app.add_subcommand("verify", "Run an acceptance suite")->fallthrough();
  verify->add_option("--suite", f.suite, "densities, decompositions, limits, polymer or all");
  verify->add_option("--sample-scale", f.sample_scale, "Multiplier on Monte Carlo sample counts");

  auto* polymer = app.add_subcommand("polymer", "Run the polymer experiments")->fallthrough();
  polymer->add_option("--n", f.n, "Polymer length");
  polymer->add_option("--replicas", f.replicas, "Environments per kappa");
  polymer->add_option("--p", f.p, "Slice fraction");
  polymer->add_option("--kappa", f.kappa, "Disorder strength for localization, shape and ergodicity");
  polymer->add_option("--kind", f.kind, "point-to-point or point-to-line");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    const Json cfg = load_config(f.config);
    if (*sample) return cmd_sample(f, cfg);
    if (*verify) return cmd_verify(f, cfg);
    return cmd_polymer(f, cfg);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
}
