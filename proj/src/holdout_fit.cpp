#include "grand/holdout_fit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace grand {

namespace {

Eigen::MatrixXd dense_adjacency(const Graph& g) {
  const int n = g.num_nodes();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int32_t j : g.neighbors(i)) A(i, j) = 1.0;
  return A;
}

}  // namespace

Eigen::MatrixXd ase_embed(const Graph& g, int d, const AseOptions& opts) {
  const int m = g.num_nodes();
  if (d < 1) throw std::invalid_argument("ase: dimension must be positive");
  if (m < d) throw std::invalid_argument("ase: need at least d nodes");

  Eigen::MatrixXd A = dense_adjacency(g);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(A);
  if (eig.info() != Eigen::Success)
    throw std::runtime_error("ase: eigensolver failed to converge (matrix norm " +
                             std::to_string(A.norm()) + ")");
  const Eigen::VectorXd& vals = eig.eigenvalues();  // ascending

  std::vector<int> idx(m);
  std::iota(idx.begin(), idx.end(), 0);
  if (opts.positive_only) {
    // Rank by clamped-positive eigenvalue; non-positive picks give zero columns.
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
      return std::max(vals(a), 0.0) > std::max(vals(b), 0.0);
    });
  } else {
    std::stable_sort(idx.begin(), idx.end(),
                     [&](int a, int b) { return std::abs(vals(a)) > std::abs(vals(b)); });
  }

  Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(m, d);
  for (int l = 0; l < d; ++l) {
    int k = idx[l];
    double lambda = opts.positive_only ? std::max(vals(k), 0.0) : std::abs(vals(k));
    if (lambda <= 0.0) continue;
    Eigen::VectorXd v = eig.eigenvectors().col(k);
    if (v.sum() < 0) v = -v;
    Z.col(l) = v * std::sqrt(lambda);
  }
  return Z;
}

double ip_log_likelihood(const Graph& g, const LatentEmbedding& e) {
  const int m = g.num_nodes();
  if (!e.alpha) throw std::invalid_argument("inner-product likelihood requires offsets");
  double ll = 0;
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      double th = e.z.row(i).dot(e.z.row(j)) + (*e.alpha)(i) + (*e.alpha)(j);
      double a = g.has_edge(i, j) ? 1.0 : 0.0;
      // a*th - log(1 + exp(th)), computed stably
      double soft = th > 0 ? th + std::log1p(std::exp(-th)) : std::log1p(std::exp(th));
      ll += a * th - soft;
    }
  }
  return ll;
}

namespace {

double ll_from_theta(const Eigen::MatrixXd& A, const Eigen::MatrixXd& Theta) {
  const int m = int(A.rows());
  double ll = 0;
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      double th = Theta(i, j);
      double soft = th > 0 ? th + std::log1p(std::exp(-th)) : std::log1p(std::exp(th));
      ll += A(i, j) * th - soft;
    }
  }
  return ll;
}

Eigen::MatrixXd theta_matrix(const Eigen::MatrixXd& X, const Eigen::VectorXd& alpha) {
  Eigen::MatrixXd Theta = X * X.transpose();
  Theta.rowwise() += alpha.transpose();
  Theta.colwise() += alpha;
  return Theta;
}

}  // namespace

IpFitResult fit_inner_product(const Graph& g, int d, const IpFitOptions& opts) {
  const int m = g.num_nodes();
  if (d < 1) throw std::invalid_argument("inner-product fit: dimension must be positive");
  if (m < d + 1) throw std::invalid_argument("inner-product fit: need at least d+1 nodes");

  Eigen::MatrixXd A = dense_adjacency(g);
  Eigen::MatrixXd X = ase_embed(g, d, opts.ase);
  Eigen::VectorXd alpha(m);
  for (int i = 0; i < m; ++i) alpha(i) = logit((g.degree(i) + 1.0) / (m + 1.0));
  alpha.array() -= alpha.mean();

  const double box = opts.clamp;
  auto clamp_all = [&](Eigen::MatrixXd& Xc, Eigen::VectorXd& ac) {
    Xc = Xc.cwiseMax(-box).cwiseMin(box);
    ac = ac.cwiseMax(-box).cwiseMin(box);
  };
  clamp_all(X, alpha);

  double step = opts.step > 0 ? opts.step : 2.0 / m;
  const double step0 = step;
  Eigen::MatrixXd Theta = theta_matrix(X, alpha);
  double ll = ll_from_theta(A, Theta);

  IpFitResult out;
  int it = 0;
  for (; it < opts.max_iters; ++it) {
    // Residual A - sigmoid(Theta) with zero diagonal drives both gradients.
    Eigen::MatrixXd R = A - Theta.unaryExpr([](double t) { return sigmoid(t); });
    R.diagonal().setZero();
    Eigen::MatrixXd gX = R * X;
    Eigen::VectorXd ga = R.rowwise().sum();

    double grad_rms = std::sqrt((gX.squaredNorm() + ga.squaredNorm()) / double(m * d + m)) / m;
    if (grad_rms < opts.tol) {
      out.converged = true;
      break;
    }

    bool accepted = false;
    for (int half = 0; half < 50; ++half) {
      Eigen::MatrixXd Xc = X + step * gX;
      Eigen::VectorXd ac = alpha + step * ga;
      // Center positions; shift offsets so pair scores are unchanged.
      Eigen::RowVectorXd mu = Xc.colwise().mean();
      ac += Xc * mu.transpose() - Eigen::VectorXd::Constant(m, 0.5 * mu.squaredNorm());
      Xc.rowwise() -= mu;
      clamp_all(Xc, ac);
      Eigen::MatrixXd Theta_c = theta_matrix(Xc, ac);
      double ll_c = ll_from_theta(A, Theta_c);
      if (ll_c >= ll - 1e-12 * std::abs(ll)) {
        X = std::move(Xc);
        alpha = std::move(ac);
        Theta = std::move(Theta_c);
        ll = ll_c;
        accepted = true;
        step = std::min(step * 1.25, 64.0 * step0);
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // step underflow: no ascent direction left at this scale
  }

  out.latents = LatentEmbedding{std::move(X), std::move(alpha)};
  out.objective = ll;
  out.iterations = it;
  return out;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> procrustes_align(const Eigen::MatrixXd& est,
                                                             const Eigen::MatrixXd& ref) {
  if (est.rows() != ref.rows() || est.cols() != ref.cols())
    throw std::invalid_argument("procrustes: shape mismatch");
  Eigen::MatrixXd M = est.transpose() * ref;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::MatrixXd Q = svd.matrixU() * svd.matrixV().transpose();
  return {est * Q, Q};
}

}  // namespace grand
