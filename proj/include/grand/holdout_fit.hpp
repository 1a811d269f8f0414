#pragma once

#include <Eigen/Dense>
#include <utility>

#include "grand/graph.hpp"
#include "grand/latent_model.hpp"

namespace grand {

struct AseOptions {
  // Keep only positive eigenvalues (negative ones contribute zero columns).
  bool positive_only = false;
};

// Adjacency spectral embedding: rows are eigenvector entries scaled by
// sqrt(|eigenvalue|), using the d eigenpairs of largest magnitude in
// descending order. Each eigenvector's sign is fixed so its entry sum is >= 0.
Eigen::MatrixXd ase_embed(const Graph& g, int d, const AseOptions& opts = {});

struct IpFitOptions {
  int max_iters = 500;
  double tol = 1e-5;        // on gradient RMS scaled by 1/m
  double step = -1.0;       // initial step size; <= 0 means 2/m
  double clamp = 10.0;      // box bound on every coordinate of (x_i, alpha_i)
  AseOptions ase;
};

struct IpFitResult {
  LatentEmbedding latents;
  double objective = 0.0;   // Bernoulli log-likelihood at the returned point
  int iterations = 0;
  bool converged = false;
};

// Full-batch gradient ascent on the inner-product model likelihood with
// backtracking halving. Positions are column-centered after every accepted
// step (offsets absorb the shift so the likelihood value is unchanged).
IpFitResult fit_inner_product(const Graph& g, int d, const IpFitOptions& opts = {});

double ip_log_likelihood(const Graph& g, const LatentEmbedding& e);

// Orthogonal alignment of est onto ref: returns (est * Q, Q) minimizing
// ||est * Q - ref||_F over orthogonal Q. Evaluation helper only; the release
// path never aligns against the truth.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> procrustes_align(const Eigen::MatrixXd& est,
                                                             const Eigen::MatrixXd& ref);

}  // namespace grand
