#pragma once

#include <cstdint>
#include <string>

#include "grand/dip.hpp"
#include "grand/graph.hpp"
#include "grand/holdout_fit.hpp"
#include "grand/latent_model.hpp"
#include "grand/nodewise_fit.hpp"

namespace grand {

struct ReleaseOptions {
  IpFitOptions ip_fit;
  NodewiseOptions nodewise;
  Kernel kernel = Kernel::Gaussian;
  double cdf_exponent = 1.0;
  double cdf_regularizer = 1e-12;
  AseOptions ase;
  int jobs = 1;
};

struct StageTimings {
  double partition = 0, holdout_fit = 0, cdf_fit = 0, nodewise = 0, privatize = 0,
         regenerate = 0, total = 0;
};

struct ReleaseDiagnostics {
  int separation_count = 0;
  bool rank_deficient = false;
  int fit_iterations = 0;
  double fit_objective = 0.0;
  bool fit_converged = true;
  bool cdf_small_sample = false;
};

// Everything needed to reproduce and describe a run; never contains hold-out
// node identities or latent values.
struct ReleaseReport {
  Graph released;
  std::string method;  // grand | laplace | hat
  ModelKind kind = ModelKind::InnerProduct;
  int d = 0;
  double epsilon = 0.0;  // 0 for the non-private baseline
  uint64_t seed = 0;
  int n_release = 0;
  int n_holdout = 0;
  StageTimings timings;
  ReleaseDiagnostics diag;
};

// Intermediate latents, exposed for white-box tests only; reports never
// serialize these.
struct CoreLatents {
  LatentEmbedding holdout_hat;
  LatentEmbedding release_hat;
  LatentEmbedding release_tilde;
};

// Hold-out model fit: spectral embedding for Rdpg, likelihood ascent for
// InnerProduct.
LatentEmbedding fit_holdout(const Graph& a22, ModelKind kind, int d, const ReleaseOptions& opts,
                            ReleaseDiagnostics* diag = nullptr);

// Per-coordinate noise scale of the location-perturbation baseline.
double laplace_noise_scale(int privatized_dim, double coord_range, double epsilon);

// The release functions read only the cross block and the hold-out block;
// the release-release block never enters any computation.
ReleaseReport grand_release_partitioned(const PartitionedGraph& p, ModelKind kind, int d,
                                        double epsilon, uint64_t seed,
                                        const ReleaseOptions& opts = {},
                                        const LatentEmbedding* holdout_precomputed = nullptr,
                                        CoreLatents* core_out = nullptr);
ReleaseReport laplace_release_partitioned(const PartitionedGraph& p, ModelKind kind, int d,
                                          double epsilon, uint64_t seed,
                                          const ReleaseOptions& opts = {},
                                          const LatentEmbedding* holdout_precomputed = nullptr,
                                          CoreLatents* core_out = nullptr);
ReleaseReport hat_release_partitioned(const PartitionedGraph& p, ModelKind kind, int d,
                                      uint64_t seed, const ReleaseOptions& opts = {},
                                      const LatentEmbedding* holdout_precomputed = nullptr);

// Convenience wrappers: partition with a seed-derived subset, then release.
ReleaseReport grand_release(const Graph& g, int n_release, ModelKind kind, int d, double epsilon,
                            uint64_t seed, const ReleaseOptions& opts = {});
ReleaseReport laplace_release(const Graph& g, int n_release, ModelKind kind, int d, double epsilon,
                              uint64_t seed, const ReleaseOptions& opts = {});
ReleaseReport hat_release(const Graph& g, int n_release, ModelKind kind, int d, uint64_t seed,
                          const ReleaseOptions& opts = {});

// Stable content hash of the canonical edge-list bytes.
std::string content_hash_hex(const std::string& bytes);

// JSON manifest: config, timings, diagnostics, output hash.
std::string manifest_json(const ReleaseReport& report, const std::string& content_hash);

}  // namespace grand
