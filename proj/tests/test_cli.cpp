#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

const fs::path kWork = fs::temp_directory_path() / "cdrp_cli_test";

// Runs the CLI with `args`, returning its exit status; stderr goes to err.txt.
int run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " \"" CDRP_CLI "\" " + args + " > \"" + (kWork / "stdout.txt").string() + "\" 2> \"" +
                          (kWork / "err.txt").string() + "\"";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

struct Fresh {
  Fresh() {
    fs::remove_all(kWork);
    fs::create_directories(kWork);
  }
};

}  // namespace

TEST_CASE("sample writes deterministic CSV") {
  Fresh f;
  const std::string a = (kWork / "a").string(), b = (kWork / "b").string();
  REQUIRE(run("sample --object dbm --grid 0:1:1024 --seed 7 --out " + a) == 0);
  REQUIRE(run("sample --object dbm --grid 0:1:1024 --seed 7 --out " + b) == 0);
  const std::string csv = slurp(fs::path(a) / "sample_dbm.csv");
  CHECK(csv == slurp(fs::path(b) / "sample_dbm.csv"));
  CHECK(csv.rfind("time,value1,value2\n0,0,0\n", 0) == 0);
  std::istringstream lines(csv);
  int rows = -1;  // header
  for (std::string line; std::getline(lines, line);) ++rows;
  CHECK(rows == 1025);
  CHECK(csv.find('\r') == std::string::npos);

  REQUIRE(run("sample --object bessel_bridge --grid 0:2:8 --endpoint 1.5 --seed 1 --out " + a) == 0);
  CHECK(slurp(fs::path(a) / "sample_bessel_bridge.csv").find("\n2,1.5\n") != std::string::npos);
}

TEST_CASE("sample validation") {
  Fresh f;
  CHECK(run("sample --object nibb --z1 1 --z2 1 --out " + kWork.string()) == 2);
  CHECK(slurp(kWork / "err.txt").find("z1 > z2") != std::string::npos);
  CHECK(run("sample --object wiener --out " + kWork.string()) == 2);
  CHECK(run("sample --object dbm --grid 1:2:10 --out " + kWork.string()) == 2);
  CHECK(run("sample --object dbm --grid nonsense --out " + kWork.string()) == 2);
  CHECK(run("sample --object dbm --bogus 1") == 2);
}

TEST_CASE("config files") {
  Fresh f;
  write(kWork / "good.json", R"({"seed": 7, "sample": {"object": "dbm", "grid": "0:1:16"}})");
  const std::string out = (kWork / "o").string();
  REQUIRE(run("sample --config " + (kWork / "good.json").string() + " --out " + out) == 0);
  REQUIRE(run("sample --object dbm --grid 0:1:16 --seed 7 --out " + (kWork / "p").string()) == 0);
  CHECK(slurp(fs::path(out) / "sample_dbm.csv") == slurp(kWork / "p" / "sample_dbm.csv"));

  write(kWork / "bad.json", R"({"seed": 7, "sample": {"object": "dbm", "gird": "0:1:16"}})");
  CHECK(run("sample --config " + (kWork / "bad.json").string()) == 2);
  CHECK(slurp(kWork / "err.txt").find("gird") != std::string::npos);
  write(kWork / "top.json", R"({"colour": 1})");
  CHECK(run("sample --object dbm --config " + (kWork / "top.json").string()) == 2);
}

TEST_CASE("output directory from the environment") {
  Fresh f;
  const std::string env_dir = (kWork / "env").string();
  REQUIRE(run("sample --object brownian_motion --grid 0:1:4", "CDRP_OUT_DIR=\"" + env_dir + "\"") == 0);
  CHECK(fs::exists(fs::path(env_dir) / "sample_brownian_motion.csv"));
  const std::string flag_dir = (kWork / "flag").string();
  REQUIRE(run("sample --object brownian_motion --grid 0:1:4 --out " + flag_dir, "CDRP_OUT_DIR=\"" + env_dir + "2\"") ==
          0);
  CHECK(fs::exists(fs::path(flag_dir) / "sample_brownian_motion.csv"));
  CHECK_FALSE(fs::exists(fs::path(env_dir + "2")));
}

TEST_CASE("verify contract") {
  Fresh f;
  CHECK(run("verify --suite everything") == 2);
  const std::string out = (kWork / "v").string();
  const int rc = run("verify --suite densities --sample-scale 0.02 --seed 12345 --out " + out);
  CHECK((rc == 0 || rc == 1));
  const Json rep = Json::parse(slurp(fs::path(out) / "verify_densities.json"));
  CHECK(rep["seed"]["master_seed"] == 12345);
  bool found = false;
  for (const auto& c : rep["checks"]) {
    CHECK(c["seed"]["master_seed"] == 12345);
    CHECK(c.contains("runtime_seconds"));
    CHECK(c.contains("tolerance"));
    CHECK(c.contains("statistic"));
    if (c["name"] == "normalization_dbm_entrance") found = c["pass"].get<bool>();
  }
  CHECK(found);
  CHECK(rc == (rep["pass"].get<bool>() ? 0 : 1));

  write(kWork / "strict.json",
        R"({"verify": {"suite": "densities", "sample_scale": 0.02, "tolerances": {"normalization_dbm_entrance": 0.0}}})");
  CHECK(run("verify --config " + (kWork / "strict.json").string() + " --out " + out) == 1);
}

TEST_CASE("polymer contract") {
  Fresh f;
  CHECK(run("polymer --n 101 --replicas 60") == 2);
  CHECK(run("polymer --n 100 --replicas 0") == 2);
  CHECK(run("polymer --n 100 --kind sideways") == 2);

  const std::string a = (kWork / "t1").string(), b = (kWork / "t2").string();
  const std::string args = "polymer --n 256 --replicas 60 --seed 3 ";
  const int rc1 = run(args + "--threads 1 --out " + a);
  const int rc2 = run(args + "--threads 2 --out " + b);
  CHECK((rc1 == 0 || rc1 == 1));
  CHECK(rc1 == rc2);
  for (const char* name :
       {"polymer_localization.json", "polymer_favorite_point.json", "polymer_bessel_shape.json",
        "polymer_ergodicity.json"}) {
    const Json x = Json::parse(slurp(fs::path(a) / name));
    const Json y = Json::parse(slurp(fs::path(b) / name));
    CHECK(x["statistics"] == y["statistics"]);
    CHECK(x["seed"]["master_seed"] == 3);
  }
  const std::string profile = slurp(fs::path(a) / "profiles_kappa_4.csv");
  CHECK(profile.rfind("replica,offset,profile\n", 0) == 0);
}
