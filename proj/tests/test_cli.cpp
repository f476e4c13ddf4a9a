#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <unistd.h>

#include <json.hpp>

#include "../tools/cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using rwre::cli::run;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("rwre_cli_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str(const std::string& name) const { return (path / name).string(); }
};

std::string write_config(const TempDir& d, const std::string& name, const std::string& text) {
  std::ofstream(d.path / name) << text;
  return d.str(name);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Everything after the timestamped first line.
std::string body(const fs::path& p) {
  const auto s = slurp(p);
  return s.substr(s.find('\n') + 1);
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

const char* kSmallRef1 = R"({
  "law": {"K": 1, "generator": "dirichlet", "alpha": [1, 1, 1], "relax_ellipticity": true},
  "experiment": {"nList": [16, 64], "sGrid": [0.5, 1], "rList": [0, 0.5], "replicas": 10, "seed": 3}
})";

}  // namespace

TEST_CASE("constants on the default law") {
  TempDir d("const");
  REQUIRE(run({"constants", "--out", d.str("o")}) == rwre::cli::kOk);
  const auto c = read_json(d.path / "o" / "constants.json");
  CHECK(c["c0"].get<double>() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(c["c1"].get<double>() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(c["sigmaBar2"].get<double>() == doctest::Approx(4.0 / 3.0).epsilon(1e-9));
  CHECK(c["beta"].get<double>() == doctest::Approx(0.75).epsilon(1e-8));
  CHECK(c["gammaQuadraticForm"].get<double>() == doctest::Approx(1.0 / 6.0).epsilon(1e-9));
  const auto m = read_json(d.path / "o" / "summary.json");
  CHECK(m["command"] == "constants");
  CHECK(m["version"] == rwre::cli::kVersion);
  CHECK(m["configHash"].is_string());
}

TEST_CASE("constants exit codes for bad laws") {
  TempDir d("codes");
  const auto ellip = write_config(
      d, "e.json", R"({"law": {"K": 1, "generator": "dirichlet", "alpha": [1, 1, 1]}})");
  CHECK(run({"constants", "--config", ellip, "--out", d.str("o1")}) == rwre::cli::kEllipticity);
  const auto deg = write_config(d, "d.json", R"({"law": {"K": 1, "generator": "mixture",
      "rows": [[0, 1, 0]], "weights": [1], "relax_ellipticity": true}})");
  CHECK(run({"constants", "--config", deg, "--out", d.str("o2")}) == rwre::cli::kDegenerate);
  const auto degJ = read_json(d.path / "o2" / "constants.json");
  CHECK(degJ["degenerate"] == true);
  const auto broken = write_config(d, "b.json", "{not json");
  CHECK(run({"constants", "--config", broken, "--out", d.str("o3")}) == rwre::cli::kParse);
}

TEST_CASE("argument errors") {
  CHECK(run({}) == rwre::cli::kParse);
  CHECK(run({"frobnicate"}) == rwre::cli::kParse);
  CHECK(run({"simulate", "--what", "cats"}) == rwre::cli::kParse);
  CHECK(run({"constants", "--config", "/nonexistent.json"}) == rwre::cli::kParse);
}

TEST_CASE("simulate walk on the degenerate law gives identical straight traces") {
  TempDir d("walk");
  const auto deg = write_config(d, "d.json", R"({"law": {"K": 1, "generator": "mixture",
      "rows": [[0, 1, 0]], "weights": [1], "relax_ellipticity": true},
      "experiment": {"nList": [8], "sGrid": [1], "rList": [0], "replicas": 3}})");
  REQUIRE(run({"simulate", "--what", "walk", "--config", deg, "--out", d.str("o")}) == rwre::cli::kOk);
  std::istringstream in(body(d.path / "o" / "walk_traces.csv"));
  std::string line;
  std::getline(in, line);
  CHECK(line == "trace,step,x,y");
  int rows = 0;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string trace, step, x, y;
    std::getline(ls, trace, ',');
    std::getline(ls, step, ',');
    std::getline(ls, x, ',');
    std::getline(ls, y, ',');
    CHECK(x == "0");
    CHECK(y == step);
    ++rows;
  }
  CHECK(rows == 3 * 9);
}

TEST_CASE("simulate pair with K = 1 has unit level gaps") {
  TempDir d("pair");
  const auto cfg = write_config(d, "c.json", kSmallRef1);
  REQUIRE(run({"simulate", "--what", "pair", "--config", cfg, "--out", d.str("o")}) == rwre::cli::kOk);
  std::istringstream in(body(d.path / "o" / "pair_levels.csv"));
  std::string line;
  std::getline(in, line);
  CHECK(line == "replica,j,L,dL,Y,meet");
  int rows = 0;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string f[6];
    for (auto& s : f) std::getline(ls, s, ',');
    if (f[1] != "0") CHECK(f[3] == "1");
    ++rows;
  }
  CHECK(rows > 0);
  const auto m = read_json(d.path / "o" / "summary.json");
  CHECK(m["outputs"].size() >= 4);
}

TEST_CASE("outputs are deterministic apart from the timestamp line") {
  TempDir d("det");
  const auto cfg = write_config(d, "c.json", kSmallRef1);
  for (const char* out : {"a", "b"})
    REQUIRE(run({"simulate", "--what", "pair", "--config", cfg, "--seed", "9", "--out", d.str(out)}) ==
            rwre::cli::kOk);
  for (const auto& e : fs::directory_iterator(d.path / "a")) {
    if (e.path().extension() != ".csv") continue;
    INFO(e.path().filename().string());
    CHECK(body(e.path()) == body(d.path / "b" / e.path().filename()));
  }
  const auto ma = read_json(d.path / "a" / "summary.json");
  const auto mb = read_json(d.path / "b" / "summary.json");
  CHECK(ma["outputsHash"] == mb["outputsHash"]);
  CHECK(ma["configHash"] == mb["configHash"]);
  CHECK(ma["seed"] == 9);

  REQUIRE(run({"simulate", "--what", "pair", "--config", cfg, "--seed", "10", "--out", d.str("c")}) ==
          rwre::cli::kOk);
  CHECK(read_json(d.path / "c" / "summary.json")["outputsHash"] != ma["outputsHash"]);
}

TEST_CASE("verify: kernels suite passes, tiny ensembles are underpowered") {
  TempDir d("verify");
  const auto cfg = write_config(d, "c.json", kSmallRef1);
  CHECK(run({"verify", "--suite", "kernels", "--config", cfg, "--out", d.str("k")}) == rwre::cli::kOk);
  CHECK(fs::exists(d.path / "k" / "reports.csv"));
  CHECK(run({"verify", "--suite", "quenched", "--config", cfg, "--out", d.str("q")}) ==
        rwre::cli::kUnderpowered);
  CHECK(fs::exists(d.path / "q" / "ensemble.csv"));
  const auto m = read_json(d.path / "q" / "summary.json");
  CHECK(m["tests"].is_array());
}

TEST_CASE("fnv1a reference values") {
  CHECK(rwre::cli::fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(rwre::cli::fnv1a("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(rwre::cli::fnv1a("foobar") == 0x85944171f73967e8ULL);
}
