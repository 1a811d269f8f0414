#include <CLI11.hpp>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "grand/graph.hpp"
#include "grand/latent_model.hpp"
#include "grand/metrics.hpp"
#include "grand/parallel.hpp"
#include "grand/release.hpp"
#include "grand/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace grand;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitBadArgs = 2;

std::string fmt(const char* f, double v) {
  char buf[64];
  snprintf(buf, sizeof(buf), f, v);
  return buf;
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

// The header line distinguishes the two accepted edge-list formats.
LoadedGraph load_graph_auto(const std::string& path) {
  std::ifstream probe(path);
  if (!probe) throw std::runtime_error("cannot open edge list file: " + path);
  std::string first;
  std::getline(probe, first);
  bool csv = first.rfind("src,dst", 0) == 0;
  return load_edge_list_file(path, csv ? EdgeListFormat::Csv : EdgeListFormat::Whitespace);
}

GenResult generate(const std::string& generator, int total, int d, double rho, uint64_t seed) {
  if (generator == "lsm") return gen_lsm_truncgauss(total, d, rho, seed);
  if (generator == "rdpg") return gen_rdpg_uniform(total, d, rho, seed);
  throw std::invalid_argument("unknown generator: " + generator);
}

std::string latents_csv(const LatentEmbedding& e) {
  std::ostringstream out;
  out.precision(17);
  for (int l = 0; l < e.d(); ++l) out << (l ? "," : "") << "z" << (l + 1);
  if (e.has_alpha()) out << ",alpha";
  out << "\n";
  for (int i = 0; i < e.n(); ++i) {
    for (int l = 0; l < e.d(); ++l) out << (l ? "," : "") << e.z(i, l);
    if (e.has_alpha()) out << "," << (*e.alpha)(i);
    out << "\n";
  }
  return out.str();
}

// ---------------------------------------------------------------- release --

struct ReleaseArgs {
  std::string input, out, model = "inner-product";
  double epsilon = 0.0, release_frac = 0.5;
  int dim = 2, jobs = 0;
  uint64_t seed = 1;
};

int cmd_release(const ReleaseArgs& a) {
  if (!(a.epsilon > 0)) {
    std::cerr << "epsilon must be positive\n";
    return kExitBadArgs;
  }
  if (!(a.release_frac > 0.0 && a.release_frac < 1.0)) {
    std::cerr << "release fraction must be in (0, 1)\n";
    return kExitBadArgs;
  }
  ModelKind kind;
  try {
    kind = model_kind_from_string(a.model);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kExitBadArgs;
  }
  try {
    LoadedGraph lg = load_graph_auto(a.input);
    const int N = lg.graph.num_nodes();
    int n_release = std::clamp(int(std::lround(a.release_frac * N)), 1, N - 1);
    ReleaseOptions opts;
    opts.jobs = a.jobs;
    ReleaseReport report =
        grand_release(lg.graph, n_release, kind, a.dim, a.epsilon, a.seed, opts);
    fs::create_directories(a.out);
    std::string edges = edge_list_string(report.released);
    write_text(fs::path(a.out) / "release.edges", edges);
    write_text(fs::path(a.out) / "manifest.json",
               manifest_json(report, content_hash_hex(edges)) + "\n");
    std::cout << "wrote " << a.out << "/release.edges (" << report.released.num_nodes()
              << " nodes, " << report.released.num_edges() << " edges)\n";
    return 0;
  } catch (const std::invalid_argument& e) {
    std::cerr << e.what() << "\n";
    return kExitBadArgs;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kExitFailure;
  }
}

// --------------------------------------------------------------- simulate --

struct SimulateArgs {
  std::string generator, out;
  int n = 0, m = 0, dim = 2;
  double rho = 0.0;
  uint64_t seed = 1;
};

int cmd_simulate(const SimulateArgs& a) {
  try {
    GenResult r = generate(a.generator, a.n + a.m, a.dim, a.rho, a.seed);
    fs::create_directories(a.out);
    write_text(fs::path(a.out) / "graph.edges", edge_list_string(r.graph));
    write_text(fs::path(a.out) / "latents.csv", latents_csv(r.latents));
    std::cout << "wrote " << a.out << "/graph.edges (" << r.graph.num_nodes() << " nodes, "
              << r.graph.num_edges() << " edges, density "
              << fmt("%.6g", r.graph.density()) << ")\n";
    return 0;
  } catch (const std::invalid_argument& e) {
    std::cerr << e.what() << "\n";
    return kExitBadArgs;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kExitFailure;
  }
}

// ------------------------------------------------------------------ bench --

struct BenchConfig {
  std::string model;
  ModelKind kind = ModelKind::InnerProduct;
  int n = 0, m = 0;
  std::vector<int> dims;
  std::vector<double> rhos, epsilons;
  std::vector<std::string> methods;
  int replications = 0;
  uint64_t seed = 0;
  std::array<bool, 5> log_flags = kDefaultLogFlags;
};

BenchConfig parse_bench_config(const json& j) {
  static const std::vector<std::string> known = {"model", "n",       "m",           "d",
                                                 "rho",   "epsilon", "methods",     "replications",
                                                 "seed",  "log_flags"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (std::find(known.begin(), known.end(), it.key()) == known.end())
      throw std::invalid_argument("bench config: unknown key \"" + it.key() + "\"");
  for (const char* req : {"model", "n", "m", "d", "rho", "epsilon", "methods", "replications",
                          "seed"})
    if (!j.contains(req)) throw std::invalid_argument(std::string("bench config: missing \"") + req + "\"");

  BenchConfig c;
  c.model = j.at("model").get<std::string>();
  c.kind = model_kind_from_string(c.model);
  c.n = j.at("n").get<int>();
  c.m = j.at("m").get<int>();
  c.dims = j.at("d").get<std::vector<int>>();
  c.rhos = j.at("rho").get<std::vector<double>>();
  c.epsilons = j.at("epsilon").get<std::vector<double>>();
  c.methods = j.at("methods").get<std::vector<std::string>>();
  c.replications = j.at("replications").get<int>();
  c.seed = j.at("seed").get<uint64_t>();
  if (j.contains("log_flags")) {
    auto flags = j.at("log_flags").get<std::vector<bool>>();
    if (flags.size() != 5)
      throw std::invalid_argument("bench config: log_flags needs exactly 5 booleans");
    for (int k = 0; k < 5; ++k) c.log_flags[k] = flags[k];
  }
  if (c.n < 1 || c.m < 2) throw std::invalid_argument("bench config: need n >= 1 and m >= 2");
  if (c.dims.empty() || c.rhos.empty() || c.epsilons.empty())
    throw std::invalid_argument("bench config: d, rho, and epsilon must be non-empty lists");
  if (c.replications < 1) throw std::invalid_argument("bench config: replications must be >= 1");
  if (c.methods.empty()) throw std::invalid_argument("bench config: methods must be non-empty");
  for (const auto& m : c.methods) {
    if (m != "grand" && m != "laplace" && m != "hat")
      throw std::invalid_argument("bench config: unknown method \"" + m + "\"");
    if (std::count(c.methods.begin(), c.methods.end(), m) != 1)
      throw std::invalid_argument("bench config: duplicate method \"" + m + "\"");
  }
  for (double e : c.epsilons)
    if (!(e > 0)) throw std::invalid_argument("epsilon must be positive");
  return c;
}

struct RepOutcome {
  // Indexed [epsilon][method]; an entry with a non-empty error is a failure.
  std::vector<std::vector<std::array<double, 5>>> dist;
  std::vector<std::vector<std::string>> error;
};

// One replication of one (d, rho) cell: generate, split, fit the hold-out
// once, then release with every method at every budget. The replication seed
// deliberately excludes method and epsilon so competing methods see the same
// network, the same split, and matched noise streams.
RepOutcome run_rep(const BenchConfig& c, int d, double rho, int rep) {
  const std::string descriptor = "model=" + c.model + ";n=" + std::to_string(c.n) +
                                 ";m=" + std::to_string(c.m) + ";d=" + std::to_string(d) +
                                 ";rho=" + fmt("%.6g", rho);
  const uint64_t rep_seed = derive_seed(c.seed, descriptor, uint64_t(rep));

  RepOutcome out;
  out.dist.assign(c.epsilons.size(), std::vector<std::array<double, 5>>(c.methods.size()));
  out.error.assign(c.epsilons.size(), std::vector<std::string>(c.methods.size()));
  auto fail_all = [&](const std::string& msg) {
    for (auto& row : out.error)
      for (auto& e : row) e = msg;
  };

  PartitionedGraph p;
  LocalStats truth;
  LatentEmbedding holdout;
  try {
    GenResult gen = generate(c.model == "inner-product" ? "lsm" : "rdpg", c.n + c.m, d, rho,
                             derive_seed(rep_seed, "gen"));
    p = partition_graph(gen.graph, c.n, derive_seed(rep_seed, "partition"));
    truth = compute_local_stats(p.a11);
    holdout = fit_holdout(p.a22, c.kind, d, ReleaseOptions{});
  } catch (const std::exception& e) {
    fail_all(e.what());
    return out;
  }

  for (size_t mi = 0; mi < c.methods.size(); ++mi) {
    const std::string& method = c.methods[mi];
    if (method == "hat") {
      // Budget-free: computed once, repeated across epsilon rows.
      try {
        ReleaseReport r = hat_release_partitioned(p, c.kind, d, rep_seed, {}, &holdout);
        auto dist = stat_distances(truth, compute_local_stats(r.released), c.log_flags);
        for (size_t ei = 0; ei < c.epsilons.size(); ++ei) out.dist[ei][mi] = dist;
      } catch (const std::exception& e) {
        for (size_t ei = 0; ei < c.epsilons.size(); ++ei) out.error[ei][mi] = e.what();
      }
      continue;
    }
    for (size_t ei = 0; ei < c.epsilons.size(); ++ei) {
      try {
        ReleaseReport r =
            method == "grand"
                ? grand_release_partitioned(p, c.kind, d, c.epsilons[ei], rep_seed, {}, &holdout)
                : laplace_release_partitioned(p, c.kind, d, c.epsilons[ei], rep_seed, {},
                                              &holdout);
        out.dist[ei][mi] = stat_distances(truth, compute_local_stats(r.released), c.log_flags);
      } catch (const std::exception& e) {
        out.error[ei][mi] = e.what();
      }
    }
  }
  return out;
}

struct BenchArgs {
  std::string config, out;
  int jobs = 0;
};

int cmd_bench(const BenchArgs& a) {
  BenchConfig c;
  try {
    std::ifstream in(a.config);
    if (!in) throw std::invalid_argument("cannot open config file: " + a.config);
    c = parse_bench_config(json::parse(in));
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kExitBadArgs;
  }

  struct Cell {
    int d;
    double rho;
  };
  std::vector<Cell> cells;
  for (int d : c.dims)
    for (double rho : c.rhos) cells.push_back({d, rho});

  // Replications run concurrently; results land in order-stable slots.
  std::vector<RepOutcome> results(cells.size() * c.replications);
  parallel_for(int64_t(results.size()), a.jobs, [&](int64_t t) {
    const Cell& cell = cells[t / c.replications];
    results[t] = run_rep(c, cell.d, cell.rho, int(t % c.replications));
  });

  std::ostringstream raw;
  raw << "model,n,m,d,rho,epsilon,method,rep,status";
  for (const char* name : kLocalStatNames) raw << "," << name;
  raw << "\n";
  bool any_cell_dead = false;
  for (size_t ci = 0; ci < cells.size(); ++ci) {
    for (size_t ei = 0; ei < c.epsilons.size(); ++ei) {
      for (size_t mi = 0; mi < c.methods.size(); ++mi) {
        int ok = 0;
        for (int rep = 0; rep < c.replications; ++rep) {
          const RepOutcome& r = results[ci * c.replications + rep];
          raw << c.model << "," << c.n << "," << c.m << "," << cells[ci].d << ","
              << fmt("%.6g", cells[ci].rho) << "," << fmt("%.6g", c.epsilons[ei]) << ","
              << c.methods[mi] << "," << rep;
          if (r.error[ei][mi].empty()) {
            ++ok;
            raw << ",ok";
            for (double v : r.dist[ei][mi]) raw << "," << fmt("%.10g", v);
          } else {
            raw << ",failed,,,,,";
            std::cerr << "bench: d=" << cells[ci].d << " rho=" << fmt("%.6g", cells[ci].rho)
                      << " epsilon=" << fmt("%.6g", c.epsilons[ei]) << " method="
                      << c.methods[mi] << " rep=" << rep << " failed: " << r.error[ei][mi]
                      << "\n";
          }
          raw << "\n";
        }
        if (ok == 0) any_cell_dead = true;
      }
    }
  }

  // Table layout: one row per metric x d x epsilon, one mean/se column pair
  // per method x rho.
  std::ostringstream summary;
  summary << "metric,d,epsilon";
  for (const auto& method : c.methods)
    for (double rho : c.rhos)
      summary << "," << method << "_rho" << fmt("%.6g", rho) << "_mean," << method << "_rho"
              << fmt("%.6g", rho) << "_se";
  summary << "\n";
  for (int k = 0; k < 5; ++k) {
    for (int d : c.dims) {
      for (size_t ei = 0; ei < c.epsilons.size(); ++ei) {
        summary << kLocalStatNames[k] << "," << d << "," << fmt("%.6g", c.epsilons[ei]);
        for (size_t mi = 0; mi < c.methods.size(); ++mi) {
          for (size_t ri = 0; ri < c.rhos.size(); ++ri) {
            size_t ci = 0;
            for (; ci < cells.size(); ++ci)
              if (cells[ci].d == d && cells[ci].rho == c.rhos[ri]) break;
            double sum = 0, sum2 = 0;
            int cnt = 0;
            for (int rep = 0; rep < c.replications; ++rep) {
              const RepOutcome& r = results[ci * c.replications + rep];
              if (!r.error[ei][mi].empty()) continue;
              double v = r.dist[ei][mi][k];
              sum += v;
              sum2 += v * v;
              ++cnt;
            }
            if (cnt == 0) {
              summary << ",,";
              continue;
            }
            double mean = sum / cnt;
            double se = 0;
            if (cnt > 1) se = std::sqrt(std::max(0.0, (sum2 - cnt * mean * mean) / (cnt - 1)) / cnt);
            summary << "," << fmt("%.10g", mean) << "," << fmt("%.10g", se);
          }
        }
        summary << "\n";
      }
    }
  }

  try {
    fs::create_directories(a.out);
    write_text(fs::path(a.out) / "raw.csv", raw.str());
    write_text(fs::path(a.out) / "summary.csv", summary.str());
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kExitFailure;
  }
  std::cout << "wrote " << a.out << "/summary.csv and raw.csv (" << cells.size() << " cells x "
            << c.replications << " reps)\n";
  return any_cell_dead ? kExitFailure : 0;
}

// ------------------------------------------------------------------- eval --

struct EvalArgs {
  std::string truth, release, out;
  int jobs = 0;
};

int cmd_eval(const EvalArgs& a) {
  try {
    LoadedGraph truth = load_graph_auto(a.truth);
    LoadedGraph release = load_graph_auto(a.release);
    LocalStats ts = compute_local_stats(truth.graph, a.jobs);
    LocalStats rs = compute_local_stats(release.graph, a.jobs);
    std::array<bool, 5> raw_flags = {false, false, false, false, false};
    auto raw = stat_distances(ts, rs, raw_flags);
    auto logd = stat_distances(ts, rs, kDefaultLogFlags);

    json j;
    j["truth"] = {{"path", a.truth},
                  {"nodes", truth.graph.num_nodes()},
                  {"edges", truth.graph.num_edges()}};
    j["release"] = {{"path", a.release},
                    {"nodes", release.graph.num_nodes()},
                    {"edges", release.graph.num_edges()}};
    j["log_flags"] = kDefaultLogFlags;
    for (int k = 0; k < 5; ++k) {
      j["distances"][kLocalStatNames[k]] = raw[k];
      j["distances_log1p"][kLocalStatNames[k]] = logd[k];
    }

    fs::create_directories(a.out);
    write_text(fs::path(a.out) / "eval.json", j.dump(2) + "\n");
    std::ostringstream tcsv, rcsv;
    write_local_stats_csv(ts, tcsv);
    write_local_stats_csv(rs, rcsv);
    write_text(fs::path(a.out) / "truth_stats.csv", tcsv.str());
    write_text(fs::path(a.out) / "release_stats.csv", rcsv.str());
    std::cout << "wrote " << a.out << "/eval.json\n";
    return 0;
  } catch (const std::invalid_argument& e) {
    std::cerr << e.what() << "\n";
    return kExitBadArgs;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Node-private network release via latent-position estimation"};
  app.require_subcommand(1);

  ReleaseArgs rel;
  CLI::App* release = app.add_subcommand("release", "Privatize and release a network");
  release->add_option("--input", rel.input, "Edge list to release")
      ->required()
      ->check(CLI::ExistingFile);
  release->add_option("--epsilon", rel.epsilon, "Privacy budget")->required();
  release->add_option("--model", rel.model, "inner-product | rdpg")
      ->default_val("inner-product");
  release->add_option("--dim", rel.dim, "Latent dimension")->default_val(2);
  release->add_option("--release-frac", rel.release_frac, "Fraction of nodes released")
      ->default_val(0.5);
  release->add_option("--seed", rel.seed, "Run seed")->default_val(1);
  release->add_option("--out", rel.out, "Output directory")->required();
  release->add_option("--jobs", rel.jobs, "Worker threads (0 = GRAND_JOBS or hardware)")
      ->default_val(0);

  SimulateArgs sim;
  CLI::App* simulate = app.add_subcommand("simulate", "Generate a synthetic network");
  simulate->add_option("--generator", sim.generator, "lsm | rdpg")->required();
  simulate->add_option("--n", sim.n, "Release-block size")->required();
  simulate->add_option("--m", sim.m, "Hold-out size (total nodes = n + m)")->default_val(0);
  simulate->add_option("--dim", sim.dim, "Latent dimension")->default_val(2);
  simulate->add_option("--rho", sim.rho, "Target edge density")->required();
  simulate->add_option("--seed", sim.seed, "Generator seed")->default_val(1);
  simulate->add_option("--out", sim.out, "Output directory")->required();

  BenchArgs bench;
  CLI::App* benchcmd = app.add_subcommand("bench", "Replicated method comparison");
  benchcmd->add_option("--config", bench.config, "JSON benchmark grid")
      ->required()
      ->check(CLI::ExistingFile);
  benchcmd->add_option("--out", bench.out, "Output directory")->required();
  benchcmd->add_option("--jobs", bench.jobs, "Concurrent replications (0 = GRAND_JOBS or hardware)")
      ->default_val(0);

  EvalArgs ev;
  CLI::App* evalcmd = app.add_subcommand("eval", "Compare local statistics of two networks");
  evalcmd->add_option("--truth", ev.truth, "Reference edge list")
      ->required()
      ->check(CLI::ExistingFile);
  evalcmd->add_option("--release", ev.release, "Released edge list")
      ->required()
      ->check(CLI::ExistingFile);
  evalcmd->add_option("--out", ev.out, "Output directory")->required();
  evalcmd->add_option("--jobs", ev.jobs, "Worker threads")->default_val(0);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitBadArgs;
  }

  if (release->parsed()) return cmd_release(rel);
  if (simulate->parsed()) return cmd_simulate(sim);
  if (benchcmd->parsed()) return cmd_bench(bench);
  return cmd_eval(ev);
}
