#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>
#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Sandbox {
  fs::path dir;
  Sandbox() {
    dir = fs::temp_directory_path() / ("grand_cli_" + std::to_string(::getpid()) + "_" +
                                       std::to_string(counter()++));
    fs::create_directories(dir);
  }
  ~Sandbox() { fs::remove_all(dir); }
  static int& counter() {
    static int c = 0;
    return c;
  }
  fs::path operator/(const std::string& leaf) const { return dir / leaf; }
};

int run_cli(const Sandbox& box, const std::string& args, std::string* err_out = nullptr) {
  fs::path err = box / "stderr.txt";
  std::string cmd = std::string(GRAND_CLI_PATH) + " " + args + " > " + (box / "stdout.txt").string() +
                    " 2> " + err.string();
  int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  if (err_out) {
    std::ifstream in(err);
    std::stringstream ss;
    ss << in.rdbuf();
    *err_out = ss.str();
  }
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(bool(in));
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
}

std::vector<std::string> split(const std::string& line, char sep = ',') {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(bool(in));
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) rows.push_back(split(line));
  return rows;
}

}  // namespace

TEST_CASE("release validates epsilon before doing any work") {
  Sandbox box;
  spit(box / "g.edges", "# n=4\n0 1\n1 2\n2 3\n");
  std::string err;
  int code = run_cli(box, "release --input " + (box / "g.edges").string() +
                              " --epsilon 0 --out " + (box / "out").string(),
                     &err);
  CHECK(code == 2);
  CHECK(err.find("epsilon must be positive") != std::string::npos);
  CHECK_FALSE(fs::exists(box / "out"));
}

TEST_CASE("release writes its artifacts and repeats byte-identically") {
  Sandbox box;
  int sim = run_cli(box, "simulate --generator rdpg --n 80 --m 80 --dim 2 --rho 0.15 --seed 5 "
                         "--out " + (box / "sim").string());
  REQUIRE(sim == 0);

  std::string base = "release --input " + (box / "sim" / "graph.edges").string() +
                     " --epsilon 2 --model rdpg --dim 2 --seed 7 --out ";
  REQUIRE(run_cli(box, base + (box / "r1").string()) == 0);
  REQUIRE(run_cli(box, base + (box / "r2").string()) == 0);

  CHECK(fs::exists(box / "r1" / "release.edges"));
  CHECK(fs::exists(box / "r1" / "manifest.json"));
  CHECK(slurp(box / "r1" / "release.edges") == slurp(box / "r2" / "release.edges"));

  auto m1 = json::parse(slurp(box / "r1" / "manifest.json"));
  auto m2 = json::parse(slurp(box / "r2" / "manifest.json"));
  m1.erase("timings_s");
  m2.erase("timings_s");
  CHECK(m1 == m2);
  CHECK(m1["method"] == "grand");
  CHECK(m1["n_release"] == 80);
}

TEST_CASE("simulate emits latents matching the embedding dimension") {
  Sandbox box;
  REQUIRE(run_cli(box, "simulate --generator rdpg --n 20 --m 20 --dim 3 --rho 0.1 --seed 2 "
                       "--out " + (box / "rd").string()) == 0);
  auto rd = read_csv(box / "rd" / "latents.csv");
  CHECK(rd[0] == std::vector<std::string>{"z1", "z2", "z3"});
  CHECK(rd.size() == 41);  // header + one row per node

  REQUIRE(run_cli(box, "simulate --generator lsm --n 20 --m 20 --dim 2 --rho 0.1 --seed 2 "
                       "--out " + (box / "ls").string()) == 0);
  auto ls = read_csv(box / "ls" / "latents.csv");
  CHECK(ls[0] == std::vector<std::string>{"z1", "z2", "alpha"});

  std::string err;
  CHECK(run_cli(box, "simulate --generator lsm --n 20 --m 20 --rho 1.5 --out " +
                         (box / "bad").string(),
                &err) == 2);
}

TEST_CASE("bench rejects unknown config keys") {
  Sandbox box;
  spit(box / "cfg.json",
       R"({"model":"rdpg","n":30,"m":30,"d":[2],"rho":[0.2],"epsilon":[1.0],)"
       R"("methods":["grand"],"replications":1,"seed":1,"typo_key":true})");
  std::string err;
  int code = run_cli(box, "bench --config " + (box / "cfg.json").string() + " --out " +
                              (box / "out").string(),
                     &err);
  CHECK(code == 2);
  CHECK(err.find("typo_key") != std::string::npos);
}

TEST_CASE("bench summary means equal the per-replication means") {
  Sandbox box;
  spit(box / "cfg.json",
       R"({"model":"rdpg","n":50,"m":60,"d":[2],"rho":[0.2],"epsilon":[1.0],)"
       R"("methods":["grand","hat"],"replications":3,"seed":9})");
  REQUIRE(run_cli(box, "bench --config " + (box / "cfg.json").string() + " --out " +
                           (box / "out").string()) == 0);

  auto raw = read_csv(box / "out" / "raw.csv");
  REQUIRE(raw.size() == 7);  // header + 2 methods x 3 reps
  auto head = raw[0];
  auto col = [&](const std::string& name) {
    return size_t(std::find(head.begin(), head.end(), name) - head.begin());
  };
  std::map<std::string, std::vector<double>> degree_by_method;
  for (size_t r = 1; r < raw.size(); ++r) {
    REQUIRE(raw[r][col("status")] == "ok");
    degree_by_method[raw[r][col("method")]].push_back(std::stod(raw[r][col("degree")]));
  }
  REQUIRE(degree_by_method["grand"].size() == 3);
  REQUIRE(degree_by_method["hat"].size() == 3);

  auto summary = read_csv(box / "out" / "summary.csv");
  auto shead = summary[0];
  auto scol = [&](const std::string& name) {
    return size_t(std::find(shead.begin(), shead.end(), name) - shead.begin());
  };
  REQUIRE(summary.size() == 6);  // header + 5 metrics x 1 d x 1 epsilon
  for (const auto& [method, vals] : degree_by_method) {
    double mean = (vals[0] + vals[1] + vals[2]) / 3.0;
    for (size_t r = 1; r < summary.size(); ++r) {
      if (summary[r][0] != "degree") continue;
      double got = std::stod(summary[r][scol(method + "_rho0.2_mean")]);
      CHECK(std::abs(got - mean) < 1e-9);
    }
  }

  // Same master seed, fresh run: byte-identical tables.
  REQUIRE(run_cli(box, "bench --config " + (box / "cfg.json").string() + " --out " +
                           (box / "out2").string()) == 0);
  CHECK(slurp(box / "out" / "raw.csv") == slurp(box / "out2" / "raw.csv"));
  CHECK(slurp(box / "out" / "summary.csv") == slurp(box / "out2" / "summary.csv"));
}

TEST_CASE("eval of identical inputs reports zero distance everywhere") {
  Sandbox box;
  spit(box / "g.csv", "src,dst\n0,1\n1,2\n0,2\n2,3\n");
  REQUIRE(run_cli(box, "eval --truth " + (box / "g.csv").string() + " --release " +
                           (box / "g.csv").string() + " --out " + (box / "ev").string()) == 0);
  auto j = json::parse(slurp(box / "ev" / "eval.json"));
  for (const char* stat : {"degree", "vshape", "triangle", "eigen_centrality",
                           "harmonic_centrality"}) {
    CHECK(j["distances"][stat].get<double>() == 0.0);
    CHECK(j["distances_log1p"][stat].get<double>() == 0.0);
  }
  CHECK(fs::exists(box / "ev" / "truth_stats.csv"));
  CHECK(fs::exists(box / "ev" / "release_stats.csv"));
  CHECK(slurp(box / "ev" / "truth_stats.csv") == slurp(box / "ev" / "release_stats.csv"));

  // Schema round-trip: re-serializing the parsed document is stable.
  CHECK(json::parse(j.dump(2)) == j);
}

TEST_CASE("eval against an empty release reduces to the raw mean degree") {
  Sandbox box;
  spit(box / "truth.edges", "# n=4\n0 1\n1 2\n2 3\n");
  spit(box / "empty.edges", "# n=4\n");
  REQUIRE(run_cli(box, "eval --truth " + (box / "truth.edges").string() + " --release " +
                           (box / "empty.edges").string() + " --out " + (box / "ev").string()) ==
          0);
  auto j = json::parse(slurp(box / "ev" / "eval.json"));
  CHECK(j["distances"]["degree"].get<double>() == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("unknown flags and missing files are usage errors") {
  Sandbox box;
  CHECK(run_cli(box, "release --no-such-flag") == 2);
  CHECK(run_cli(box, "eval --truth /nonexistent --release /nonexistent --out " +
                         (box / "x").string()) == 2);
}
