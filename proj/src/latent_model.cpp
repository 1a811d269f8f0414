#include "grand/latent_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace grand {

ModelKind model_kind_from_string(const std::string& s) {
  if (s == "inner-product" || s == "inner_product") return ModelKind::InnerProduct;
  if (s == "rdpg") return ModelKind::Rdpg;
  throw std::invalid_argument("unknown model kind: " + s);
}

std::string to_string(ModelKind kind) {
  return kind == ModelKind::InnerProduct ? "inner-product" : "rdpg";
}

Eigen::MatrixXd LatentEmbedding::augmented() const {
  if (!alpha) return z;
  Eigen::MatrixXd out(z.rows(), z.cols() + 1);
  out.leftCols(z.cols()) = z;
  out.col(z.cols()) = *alpha;
  return out;
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

double logit(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("logit: argument must be in (0, 1)");
  return std::log(p / (1.0 - p));
}

double link_probability(ModelKind kind, const LatentEmbedding& e, int i, int j) {
  if (i < 0 || j < 0 || i >= e.n() || j >= e.n())
    throw std::out_of_range("link_probability: node index out of range");
  double ip = e.z.row(i).dot(e.z.row(j));
  if (kind == ModelKind::InnerProduct) {
    if (!e.alpha) throw std::invalid_argument("inner-product model requires offsets");
    return sigmoid(ip + (*e.alpha)(i) + (*e.alpha)(j));
  }
  return std::clamp(ip, 0.0, 1.0);
}

Graph sample_network(ModelKind kind, const LatentEmbedding& e, Rng& rng) {
  const int n = e.n();
  if (kind == ModelKind::InnerProduct && !e.alpha)
    throw std::invalid_argument("inner-product model requires offsets");
  Graph g(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      double ip = e.z.row(i).dot(e.z.row(j));
      double p = kind == ModelKind::InnerProduct
                     ? sigmoid(ip + (*e.alpha)(i) + (*e.alpha)(j))
                     : std::clamp(ip, 0.0, 1.0);
      if (rng.uniform01() < p) g.add_edge(i, j);
    }
  }
  return g;
}

GenResult gen_lsm_truncgauss(int n, int d, double rho, uint64_t seed, const LsmOptions& opts) {
  if (n < 2 || d < 1) throw std::invalid_argument("generator: need n >= 2 and d >= 1");
  if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("generator: rho must be in (0, 1)");
  if (opts.n_components < 1) throw std::invalid_argument("generator: need at least one component");

  Rng rng(derive_seed(seed, "lsm"));
  Eigen::MatrixXd means(opts.n_components, d);
  for (int k = 0; k < opts.n_components; ++k)
    for (int l = 0; l < d; ++l) means(k, l) = rng.uniform(-1.0, 1.0);

  Eigen::MatrixXd X(n, d);
  for (int i = 0; i < n; ++i) {
    int k = int(rng.uniform_int(0, opts.n_components - 1));
    // Rejection against the truncation box, coordinate-joint.
    for (;;) {
      bool ok = true;
      for (int l = 0; l < d; ++l) {
        double v = means(k, l) + opts.component_sd * rng.normal();
        X(i, l) = v;
        if (v < opts.trunc_lo || v > opts.trunc_hi) ok = false;
      }
      if (ok) break;
    }
  }
  Eigen::VectorXd alpha(n);
  for (int i = 0; i < n; ++i) alpha(i) = rng.uniform(opts.alpha_lo, opts.alpha_hi);

  // Monte-Carlo pair pool for density calibration.
  std::vector<double> pair_sum(opts.mc_pairs);
  for (int t = 0; t < opts.mc_pairs; ++t) {
    int i = int(rng.uniform_int(0, n - 1));
    int j;
    do {
      j = int(rng.uniform_int(0, n - 1));
    } while (j == i);
    pair_sum[t] = X.row(i).dot(X.row(j)) + alpha(i) + alpha(j);
  }
  auto mc_density = [&](double c) {
    double s = 0;
    for (double v : pair_sum) s += sigmoid(v + 2.0 * c);
    return s / double(pair_sum.size());
  };
  double lo = -40.0, hi = 40.0;
  if (mc_density(lo) > rho || mc_density(hi) < rho)
    throw std::runtime_error("generator: density calibration failed to bracket rho");
  double c = 0;
  for (int it = 0; it < opts.max_bisect_iters; ++it) {
    c = 0.5 * (lo + hi);
    double dens = mc_density(c);
    if (std::abs(dens - rho) < opts.density_tol) break;
    if (dens < rho)
      lo = c;
    else
      hi = c;
  }
  alpha.array() += c;

  GenResult out;
  out.latents = LatentEmbedding{std::move(X), std::move(alpha)};
  out.calibration_shift = c;
  out.expected_density = mc_density(c);  // pair_sum holds pre-shift sums
  Rng net_rng(derive_seed(seed, "lsm-net"));
  out.graph = sample_network(ModelKind::InnerProduct, out.latents, net_rng);
  return out;
}

GenResult gen_rdpg_uniform(int n, int d, double rho, uint64_t seed) {
  if (n < 2 || d < 1) throw std::invalid_argument("generator: need n >= 2 and d >= 1");
  if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("generator: rho must be in (0, 1)");
  double s = std::sqrt(rho / (d / 4.0));
  Rng rng(derive_seed(seed, "rdpg"));
  Eigen::MatrixXd Z(n, d);
  for (int i = 0; i < n; ++i)
    for (int l = 0; l < d; ++l) Z(i, l) = s * rng.uniform01();

  GenResult out;
  out.latents = LatentEmbedding{std::move(Z), std::nullopt};

  const int probes = 100000;
  int64_t clamped = 0;
  double mean_p = 0;
  for (int t = 0; t < probes; ++t) {
    int i = int(rng.uniform_int(0, n - 1));
    int j;
    do {
      j = int(rng.uniform_int(0, n - 1));
    } while (j == i);
    double ip = out.latents.z.row(i).dot(out.latents.z.row(j));
    if (ip > 1.0 || ip < 0.0) ++clamped;
    mean_p += std::clamp(ip, 0.0, 1.0);
  }
  out.clamped_fraction = double(clamped) / probes;
  out.expected_density = mean_p / probes;
  Rng net_rng(derive_seed(seed, "rdpg-net"));
  out.graph = sample_network(ModelKind::Rdpg, out.latents, net_rng);
  return out;
}

}  // namespace grand
