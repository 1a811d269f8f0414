#include "grand/release.hpp"

#include <chrono>
#include <json.hpp>
#include <stdexcept>
#include <type_traits>

#include "grand/parallel.hpp"

namespace grand {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

[[noreturn]] void stage_fail(const std::string& stage, const std::string& what) {
  throw std::runtime_error("[stage:" + stage + "] " + what);
}

template <class Fn>
auto run_stage(const char* stage, double& timing, Fn&& fn) {
  auto t0 = Clock::now();
  try {
    if constexpr (std::is_void_v<decltype(fn())>) {
      fn();
      timing = seconds_since(t0);
      return;
    } else {
      auto out = fn();
      timing = seconds_since(t0);
      return out;
    }
  } catch (const std::exception& e) {
    stage_fail(stage, e.what());
  }
}

// Fresh anonymous node ids in randomized order, so released labels carry no
// trace of the original ordering.
Graph relabel_random(const Graph& g, uint64_t seed) {
  const int n = g.num_nodes();
  std::vector<int32_t> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;
  Rng rng(seed);
  for (int i = n - 1; i > 0; --i) {
    int j = int(rng.uniform_int(0, i));
    std::swap(perm[i], perm[j]);
  }
  Graph out(n);
  for (int i = 0; i < n; ++i)
    for (int32_t j : g.neighbors(i))
      if (j > i) out.add_edge(perm[i], perm[j]);
  return out;
}

void validate_common(const PartitionedGraph& p, int d) {
  const int m = int(p.holdout_ids.size());
  if (d < 1) throw std::invalid_argument("release: dimension must be positive");
  if (d >= m) throw std::invalid_argument("release: dimension must be below the hold-out size");
  if (p.a12.rows() != int(p.release_ids.size()) || p.a12.cols() != m)
    throw std::invalid_argument("release: inconsistent partition blocks");
}

ReleaseReport make_report(const char* method, ModelKind kind, int d, double epsilon, uint64_t seed,
                          const PartitionedGraph& p) {
  ReleaseReport r;
  r.method = method;
  r.kind = kind;
  r.d = d;
  r.epsilon = epsilon;
  r.seed = seed;
  r.n_release = int(p.release_ids.size());
  r.n_holdout = int(p.holdout_ids.size());
  return r;
}

}  // namespace

LatentEmbedding fit_holdout(const Graph& a22, ModelKind kind, int d, const ReleaseOptions& opts,
                            ReleaseDiagnostics* diag) {
  if (kind == ModelKind::InnerProduct) {
    IpFitOptions fo = opts.ip_fit;
    fo.ase = opts.ase;
    IpFitResult fit = fit_inner_product(a22, d, fo);
    if (diag) {
      diag->fit_iterations = fit.iterations;
      diag->fit_objective = fit.objective;
      diag->fit_converged = fit.converged;
    }
    return std::move(fit.latents);
  }
  AseOptions ase = opts.ase;
  Eigen::MatrixXd Z = ase_embed(a22, d, ase);
  return LatentEmbedding{std::move(Z), std::nullopt};
}

double laplace_noise_scale(int privatized_dim, double coord_range, double epsilon) {
  if (!(epsilon > 0)) throw std::invalid_argument("epsilon must be positive");
  return double(privatized_dim) * coord_range / epsilon;
}

ReleaseReport grand_release_partitioned(const PartitionedGraph& p, ModelKind kind, int d,
                                        double epsilon, uint64_t seed, const ReleaseOptions& opts,
                                        const LatentEmbedding* holdout_precomputed,
                                        CoreLatents* core_out) {
  if (!(epsilon > 0)) throw std::invalid_argument("epsilon must be positive");
  validate_common(p, d);
  auto t_total = Clock::now();
  ReleaseReport report = make_report("grand", kind, d, epsilon, seed, p);

  LatentEmbedding holdout = run_stage("holdout-fit", report.timings.holdout_fit, [&] {
    return holdout_precomputed ? *holdout_precomputed
                               : fit_holdout(p.a22, kind, d, opts, &report.diag);
  });

  CdfModel model = run_stage("cdf-fit", report.timings.cdf_fit, [&] {
    CdfModel m = CdfModel::fit(holdout, opts.kernel, opts.cdf_exponent, opts.cdf_regularizer);
    report.diag.cdf_small_sample = m.small_sample();
    return m;
  });

  NodewiseAllResult nodewise = run_stage("nodewise-fit", report.timings.nodewise, [&] {
    NodewiseAllResult nw = nodewise_fit_all(p.a12, holdout, kind, opts.nodewise, opts.jobs);
    report.diag.separation_count = nw.separation_count;
    report.diag.rank_deficient = nw.any_rank_deficient;
    return nw;
  });

  LatentEmbedding priv = run_stage("privatize", report.timings.privatize, [&] {
    return privatize_all(nodewise.latents, model, epsilon, derive_seed(seed, "dip"), opts.jobs);
  });

  run_stage("regenerate", report.timings.regenerate, [&] {
    Rng rng(derive_seed(seed, "regen"));
    Graph raw = sample_network(kind, priv, rng);
    report.released = relabel_random(raw, derive_seed(seed, "relabel"));
  });

  if (core_out)
    *core_out = CoreLatents{std::move(holdout), std::move(nodewise.latents), std::move(priv)};
  report.timings.total = seconds_since(t_total);
  return report;
}

ReleaseReport laplace_release_partitioned(const PartitionedGraph& p, ModelKind kind, int d,
                                          double epsilon, uint64_t seed,
                                          const ReleaseOptions& opts,
                                          const LatentEmbedding* holdout_precomputed,
                                          CoreLatents* core_out) {
  if (!(epsilon > 0)) throw std::invalid_argument("epsilon must be positive");
  validate_common(p, d);
  auto t_total = Clock::now();
  ReleaseReport report = make_report("laplace", kind, d, epsilon, seed, p);

  LatentEmbedding holdout = run_stage("holdout-fit", report.timings.holdout_fit, [&] {
    return holdout_precomputed ? *holdout_precomputed
                               : fit_holdout(p.a22, kind, d, opts, &report.diag);
  });

  NodewiseAllResult nodewise = run_stage("nodewise-fit", report.timings.nodewise, [&] {
    NodewiseAllResult nw = nodewise_fit_all(p.a12, holdout, kind, opts.nodewise, opts.jobs);
    report.diag.separation_count = nw.separation_count;
    report.diag.rank_deficient = nw.any_rank_deficient;
    return nw;
  });

  // Location perturbation: coordinate l gets Laplace noise scaled by the
  // privatized dimension count times the hold-out coordinate range over
  // epsilon, applied to release estimates coordinate by coordinate.
  LatentEmbedding noisy = run_stage("privatize", report.timings.privatize, [&] {
    Eigen::MatrixXd holdout_aug = holdout.augmented();
    const int dprime = int(holdout_aug.cols());
    Eigen::VectorXd scale(dprime);
    for (int l = 0; l < dprime; ++l) {
      double range = holdout_aug.col(l).maxCoeff() - holdout_aug.col(l).minCoeff();
      scale(l) = laplace_noise_scale(dprime, range, epsilon);
    }
    LatentEmbedding out = nodewise.latents;
    const int n = out.n();
    parallel_for(n, opts.jobs, [&](int64_t i) {
      Rng rng(derive_seed(seed, "lap-node", uint64_t(i)));
      for (int l = 0; l < out.d(); ++l) out.z(i, l) += scale(l) * laplace_quantile(rng.uniform_open01(), 1.0);
      if (out.alpha) (*out.alpha)(i) += scale(dprime - 1) * laplace_quantile(rng.uniform_open01(), 1.0);
    });
    return out;
  });

  run_stage("regenerate", report.timings.regenerate, [&] {
    Rng rng(derive_seed(seed, "regen"));
    Graph raw = sample_network(kind, noisy, rng);
    report.released = relabel_random(raw, derive_seed(seed, "relabel"));
  });

  if (core_out)
    *core_out = CoreLatents{std::move(holdout), std::move(nodewise.latents), std::move(noisy)};
  report.timings.total = seconds_since(t_total);
  return report;
}

ReleaseReport hat_release_partitioned(const PartitionedGraph& p, ModelKind kind, int d,
                                      uint64_t seed, const ReleaseOptions& opts,
                                      const LatentEmbedding* holdout_precomputed) {
  validate_common(p, d);
  auto t_total = Clock::now();
  ReleaseReport report = make_report("hat", kind, d, 0.0, seed, p);

  LatentEmbedding holdout = run_stage("holdout-fit", report.timings.holdout_fit, [&] {
    return holdout_precomputed ? *holdout_precomputed
                               : fit_holdout(p.a22, kind, d, opts, &report.diag);
  });

  // Non-private reference: bootstrap release-set latents from the fitted
  // hold-out latents, then regenerate.
  const int n = int(p.release_ids.size());
  LatentEmbedding boot;
  run_stage("privatize", report.timings.privatize, [&] {
    Rng rng(derive_seed(seed, "boot"));
    boot.z = Eigen::MatrixXd::Zero(n, d);
    if (holdout.alpha) boot.alpha = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) {
      int k = int(rng.uniform_int(0, holdout.n() - 1));
      boot.z.row(i) = holdout.z.row(k);
      if (boot.alpha) (*boot.alpha)(i) = (*holdout.alpha)(k);
    }
  });

  run_stage("regenerate", report.timings.regenerate, [&] {
    Rng rng(derive_seed(seed, "regen"));
    Graph raw = sample_network(kind, boot, rng);
    report.released = relabel_random(raw, derive_seed(seed, "relabel"));
  });

  report.timings.total = seconds_since(t_total);
  return report;
}

namespace {

void with_partition(const Graph& g, int n_release, uint64_t seed, double& partition_time,
                    PartitionedGraph& p_out) {
  auto t0 = Clock::now();
  try {
    p_out = partition_graph(g, n_release, derive_seed(seed, "partition"));
  } catch (const std::exception& e) {
    stage_fail("partition", e.what());
  }
  partition_time = seconds_since(t0);
}

}  // namespace

ReleaseReport grand_release(const Graph& g, int n_release, ModelKind kind, int d, double epsilon,
                            uint64_t seed, const ReleaseOptions& opts) {
  PartitionedGraph p;
  double pt = 0;
  with_partition(g, n_release, seed, pt, p);
  ReleaseReport r = grand_release_partitioned(p, kind, d, epsilon, seed, opts);
  r.timings.partition = pt;
  r.timings.total += pt;
  return r;
}

ReleaseReport laplace_release(const Graph& g, int n_release, ModelKind kind, int d, double epsilon,
                              uint64_t seed, const ReleaseOptions& opts) {
  PartitionedGraph p;
  double pt = 0;
  with_partition(g, n_release, seed, pt, p);
  ReleaseReport r = laplace_release_partitioned(p, kind, d, epsilon, seed, opts);
  r.timings.partition = pt;
  r.timings.total += pt;
  return r;
}

ReleaseReport hat_release(const Graph& g, int n_release, ModelKind kind, int d, uint64_t seed,
                          const ReleaseOptions& opts) {
  PartitionedGraph p;
  double pt = 0;
  with_partition(g, n_release, seed, pt, p);
  ReleaseReport r = hat_release_partitioned(p, kind, d, seed, opts);
  r.timings.partition = pt;
  r.timings.total += pt;
  return r;
}

std::string content_hash_hex(const std::string& bytes) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[32];
  snprintf(buf, sizeof(buf), "fnv1a64:%016llx", (unsigned long long)h);
  return buf;
}

std::string manifest_json(const ReleaseReport& report, const std::string& content_hash) {
  nlohmann::json j;
  j["method"] = report.method;
  j["model"] = to_string(report.kind);
  j["dim"] = report.d;
  if (report.method != "hat") j["epsilon"] = report.epsilon;
  j["seed"] = report.seed;
  j["n_release"] = report.n_release;
  j["n_holdout"] = report.n_holdout;
  j["edge_count"] = report.released.num_edges();
  j["density"] = report.released.density();
  j["content_hash"] = content_hash;
  j["timings_s"] = {{"partition", report.timings.partition},
                    {"holdout_fit", report.timings.holdout_fit},
                    {"cdf_fit", report.timings.cdf_fit},
                    {"nodewise_fit", report.timings.nodewise},
                    {"privatize", report.timings.privatize},
                    {"regenerate", report.timings.regenerate},
                    {"total", report.timings.total}};
  j["diagnostics"] = {{"separation_count", report.diag.separation_count},
                      {"rank_deficient", report.diag.rank_deficient},
                      {"fit_iterations", report.diag.fit_iterations},
                      {"fit_objective", report.diag.fit_objective},
                      {"fit_converged", report.diag.fit_converged},
                      {"cdf_small_sample", report.diag.cdf_small_sample}};
  return j.dump(2);
}

}  // namespace grand
