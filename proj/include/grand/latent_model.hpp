#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>

#include "grand/graph.hpp"
#include "grand/rng.hpp"

namespace grand {

// InnerProduct: P(edge) = sigmoid(x_i . x_j + alpha_i + alpha_j), latent
// positions plus node-specific degree offsets. Rdpg: P(edge) = x_i . x_j
// clamped to [0, 1].
enum class ModelKind { InnerProduct, Rdpg };

ModelKind model_kind_from_string(const std::string& s);
std::string to_string(ModelKind kind);

struct LatentEmbedding {
  Eigen::MatrixXd z;                     // n x d positions
  std::optional<Eigen::VectorXd> alpha;  // n offsets, InnerProduct only

  int n() const { return int(z.rows()); }
  int d() const { return int(z.cols()); }
  bool has_alpha() const { return alpha.has_value(); }
  // Coordinates in privatization order: positions first, offset appended last.
  int privatized_dim() const { return d() + (has_alpha() ? 1 : 0); }
  Eigen::MatrixXd augmented() const;
};

double sigmoid(double x);
double logit(double p);

double link_probability(ModelKind kind, const LatentEmbedding& e, int i, int j);

// Independent Bernoulli draws over unordered pairs, fixed (i, j) scan order.
Graph sample_network(ModelKind kind, const LatentEmbedding& e, Rng& rng);

struct GenResult {
  LatentEmbedding latents;
  Graph graph;
  double calibration_shift = 0.0;   // common offset shift found by bisection (LSM)
  double clamped_fraction = 0.0;    // fraction of probed pairs with clamped probability (RDPG)
  double expected_density = 0.0;    // Monte-Carlo mean link probability after calibration
};

struct LsmOptions {
  int n_components = 3;
  double component_sd = 0.5;
  double trunc_lo = -2.0, trunc_hi = 2.0;
  double alpha_lo = -1.0, alpha_hi = 0.0;
  double density_tol = 1e-3;
  int max_bisect_iters = 60;
  int mc_pairs = 100000;
};

// Positions from an equal-weight mixture of truncated Gaussians (means drawn
// uniformly in [-1,1]^d per seed, truncation by rejection), offsets uniform,
// then a common offset shift calibrated by bisection so the Monte-Carlo mean
// link probability hits rho.
GenResult gen_lsm_truncgauss(int n, int d, double rho, uint64_t seed, const LsmOptions& opts = {});

// Positions uniform on [0, s]^d with s chosen so the expected inner product
// is rho; probabilities clamped to [0, 1].
GenResult gen_rdpg_uniform(int n, int d, double rho, uint64_t seed);

}  // namespace grand
