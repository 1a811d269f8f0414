#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "grand/graph.hpp"
#include "grand/latent_model.hpp"

namespace grand {

struct NodewiseOptions {
  int max_iters = 100;
  double tol = 1e-8;            // on gradient infinity norm
  double clamp = 10.0;          // box bound on every estimated coordinate
  double ridge_logistic = 1e-6; // Hessian regularizer, not an objective penalty
  double ridge_ols = 1e-10;
};

struct NodewiseFit {
  Eigen::VectorXd z;      // length d
  double alpha = 0.0;     // InnerProduct only
  bool separation = false;
  bool rank_deficient = false;
  int iterations = 0;
};

// Per-row logistic regression of row against fixed hold-out positions, with
// hold-out offsets entering as known per-observation offsets. Estimates
// (x_i, alpha_i). Complete separation is returned clamped and flagged, never
// an error.
NodewiseFit nodewise_logistic(std::span<const uint8_t> row, const LatentEmbedding& holdout,
                              const NodewiseOptions& opts = {});

// Per-row ridge least squares of row against fixed hold-out positions.
NodewiseFit nodewise_ols(std::span<const uint8_t> row, const Eigen::MatrixXd& holdout_z,
                         const NodewiseOptions& opts = {});

struct NodewiseAllResult {
  LatentEmbedding latents;               // release-node estimates, offsets iff InnerProduct
  std::vector<uint8_t> separation_flags; // one per release node
  int separation_count = 0;
  bool any_rank_deficient = false;
};

// Row i of a12 depends only on row i of the output: rows can be solved in any
// order or in parallel with bit-identical results.
NodewiseAllResult nodewise_fit_all(const BitMatrix& a12, const LatentEmbedding& holdout,
                                   ModelKind kind, const NodewiseOptions& opts = {}, int jobs = 1);

}  // namespace grand
