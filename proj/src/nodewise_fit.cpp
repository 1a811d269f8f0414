#include "grand/nodewise_fit.hpp"

#include <cmath>
#include <stdexcept>

#include "grand/parallel.hpp"

namespace grand {

namespace {

double logistic_nll(const Eigen::MatrixXd& H, const Eigen::VectorXd& offset,
                    std::span<const uint8_t> y, const Eigen::VectorXd& beta) {
  // beta = (x, a); eta_j = H_j . x + a + offset_j
  const int m = int(H.rows()), d = int(H.cols());
  double nll = 0;
  for (int j = 0; j < m; ++j) {
    double eta = H.row(j).dot(beta.head(d)) + beta(d) + offset(j);
    double soft = eta > 0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
    nll += soft - (y[j] ? eta : 0.0);
  }
  return nll;
}

}  // namespace

NodewiseFit nodewise_logistic(std::span<const uint8_t> row, const LatentEmbedding& holdout,
                              const NodewiseOptions& opts) {
  if (!holdout.alpha)
    throw std::invalid_argument("nodewise logistic: hold-out estimates lack offsets");
  const int m = holdout.n(), d = holdout.d();
  if (int(row.size()) != m) throw std::invalid_argument("nodewise logistic: row length mismatch");

  const Eigen::MatrixXd& H = holdout.z;
  const Eigen::VectorXd& offset = *holdout.alpha;
  const int p = d + 1;
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  double nll = logistic_nll(H, offset, row, beta);

  NodewiseFit out;
  int it = 0;
  for (; it < opts.max_iters; ++it) {
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(p);
    Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(p, p);
    for (int j = 0; j < m; ++j) {
      double eta = H.row(j).dot(beta.head(d)) + beta(d) + offset(j);
      double pj = sigmoid(eta);
      double r = pj - (row[j] ? 1.0 : 0.0);
      double w = pj * (1.0 - pj);
      Eigen::VectorXd f(p);
      f.head(d) = H.row(j).transpose();
      f(p - 1) = 1.0;
      grad += r * f;
      hess += w * (f * f.transpose());
    }
    if (grad.lpNorm<Eigen::Infinity>() < opts.tol) break;
    hess.diagonal().array() += opts.ridge_logistic;
    Eigen::VectorXd delta = hess.ldlt().solve(grad);

    double stepscale = 1.0;
    bool accepted = false;
    for (int half = 0; half < 40; ++half) {
      Eigen::VectorXd cand =
          (beta - stepscale * delta).cwiseMax(-opts.clamp).cwiseMin(opts.clamp);
      double nll_c = logistic_nll(H, offset, row, cand);
      if (nll_c <= nll + 1e-12 * std::abs(nll)) {
        beta = std::move(cand);
        nll = nll_c;
        accepted = true;
        break;
      }
      stepscale *= 0.5;
    }
    if (!accepted) break;
  }

  out.z = beta.head(d);
  out.alpha = beta(d);
  out.iterations = it;
  out.separation = beta.lpNorm<Eigen::Infinity>() >= opts.clamp - 1e-8;
  return out;
}

NodewiseFit nodewise_ols(std::span<const uint8_t> row, const Eigen::MatrixXd& holdout_z,
                         const NodewiseOptions& opts) {
  const int m = int(holdout_z.rows());
  if (int(row.size()) != m) throw std::invalid_argument("nodewise ols: row length mismatch");

  Eigen::VectorXd y(m);
  for (int j = 0; j < m; ++j) y(j) = row[j] ? 1.0 : 0.0;
  Eigen::MatrixXd gram = holdout_z.transpose() * holdout_z;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  double vmax = eig.eigenvalues().cwiseAbs().maxCoeff();
  double vmin = eig.eigenvalues().minCoeff();

  NodewiseFit out;
  out.rank_deficient = vmin < 1e-8 * std::max(1.0, vmax);
  gram.diagonal().array() += opts.ridge_ols;
  out.z = gram.ldlt().solve(holdout_z.transpose() * y);
  out.iterations = 1;
  return out;
}

NodewiseAllResult nodewise_fit_all(const BitMatrix& a12, const LatentEmbedding& holdout,
                                   ModelKind kind, const NodewiseOptions& opts, int jobs) {
  const int n = a12.rows(), m = a12.cols(), d = holdout.d();
  if (m != holdout.n()) throw std::invalid_argument("nodewise fit: block width mismatch");
  if (kind == ModelKind::InnerProduct && !holdout.alpha)
    throw std::invalid_argument("nodewise fit: inner-product model requires hold-out offsets");

  NodewiseAllResult out;
  out.latents.z = Eigen::MatrixXd::Zero(n, d);
  if (kind == ModelKind::InnerProduct) out.latents.alpha = Eigen::VectorXd::Zero(n);
  out.separation_flags.assign(n, 0);
  std::vector<uint8_t> rank_flags(n, 0);

  parallel_for(n, jobs, [&](int64_t i) {
    std::vector<uint8_t> row = a12.row_bytes(int(i));
    NodewiseFit fit = kind == ModelKind::InnerProduct
                          ? nodewise_logistic(row, holdout, opts)
                          : nodewise_ols(row, holdout.z, opts);
    out.latents.z.row(i) = fit.z.transpose();
    if (out.latents.alpha) (*out.latents.alpha)(i) = fit.alpha;
    out.separation_flags[i] = fit.separation ? 1 : 0;
    rank_flags[i] = fit.rank_deficient ? 1 : 0;
  });

  for (int i = 0; i < n; ++i) {
    out.separation_count += out.separation_flags[i];
    if (rank_flags[i]) out.any_rank_deficient = true;
  }
  return out;
}

}  // namespace grand
