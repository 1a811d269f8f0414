#include "grand/dip.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "grand/parallel.hpp"

namespace grand {

double cdf_bandwidth(double m, double c) {
  if (m <= 1.0) throw std::invalid_argument("bandwidth: need m > 1");
  return std::pow(std::log(m), -c);
}

CdfModel CdfModel::fit(const LatentEmbedding& holdout, Kernel kernel, double bandwidth_exponent,
                       double regularizer) {
  const int m = holdout.n();
  if (m < 10) throw std::invalid_argument("cdf model: need at least 10 sample vectors");
  Eigen::MatrixXd sample = holdout.augmented();
  if (!sample.allFinite()) throw std::invalid_argument("cdf model: non-finite latent estimates");

  CdfModel model;
  model.sample_ = std::move(sample);
  model.kernel_ = kernel;
  model.h_ = cdf_bandwidth(double(m), bandwidth_exponent);
  model.reg_ = regularizer;
  model.small_sample_ = m < 100;
  model.order_.resize(model.dim());
  for (int l = 0; l < model.dim(); ++l) {
    auto& ord = model.order_[l];
    ord.resize(m);
    std::iota(ord.begin(), ord.end(), 0);
    const auto& col = model.sample_;
    std::stable_sort(ord.begin(), ord.end(),
                     [&col, l](int32_t a, int32_t b) { return col(a, l) < col(b, l); });
  }
  return model;
}

void CdfModel::weights(int coord, std::span<const double> cond, std::vector<double>& w) const {
  const int m = sample_size();
  w.assign(m, 1.0);
  if (coord == 0) return;
  if (int(cond.size()) < coord)
    throw std::invalid_argument("cdf model: too few conditioning coordinates");
  for (int i = 0; i < m; ++i) {
    double wi = 1.0;
    for (int k = 0; k < coord; ++k) {
      double u = (cond[k] - sample_(i, k)) / h_;
      if (kernel_ == Kernel::Gaussian) {
        wi *= 0.3989422804014327 * std::exp(-0.5 * u * u);
      } else {
        double t = 1.0 - u * u;
        wi *= t > 0 ? 0.75 * t : 0.0;
      }
      if (wi == 0.0) break;
    }
    w[i] = wi;
  }
}

double CdfModel::cdf(int coord, double x, std::span<const double> cond) const {
  if (coord < 0 || coord >= dim()) throw std::out_of_range("cdf model: coordinate out of range");
  std::vector<double> w;
  weights(coord, cond, w);
  double num = 0, den = reg_;
  for (int i = 0; i < sample_size(); ++i) {
    den += w[i];
    if (sample_(i, coord) <= x) num += w[i];
  }
  return num / den;
}

double CdfModel::quantile(int coord, double q, std::span<const double> cond) const {
  if (coord < 0 || coord >= dim()) throw std::out_of_range("cdf model: coordinate out of range");
  const int m = sample_size();
  std::vector<double> w;
  weights(coord, cond, w);
  double den = reg_;
  for (double wi : w) den += wi;

  const auto& ord = order_[coord];
  // Walk weighted order statistics (cum_k, v_k), interpolating linearly and
  // clamping outside the attained CDF range.
  double cum_prev = 0, v_prev = sample_(ord[0], coord);
  bool started = false;
  for (int k = 0; k < m; ++k) {
    double wk = w[ord[k]];
    if (wk <= 0.0) continue;
    double v = sample_(ord[k], coord);
    double cum = (started ? cum_prev : 0) + wk / den;
    if (!started) {
      if (q <= cum) return v;  // below the smallest attained level
      started = true;
    } else if (q <= cum) {
      double span = cum - cum_prev;
      double t = span > 0 ? (q - cum_prev) / span : 1.0;
      return v_prev + t * (v - v_prev);
    }
    cum_prev = cum;
    v_prev = v;
  }
  return v_prev;  // above the largest attained level
}

double g_cdf(double t, double epsilon) {
  if (!(epsilon > 0)) throw std::invalid_argument("privacy budget must be positive");
  const double b = 1.0 / epsilon;
  // Convolution of a unit-uniform CDF with a Laplace(0, b) kernel; all
  // exponents kept nonpositive for stability.
  if (t < 0) return 0.5 * b * (std::exp(t / b) - std::exp((t - 1.0) / b));
  if (t < 1) return t + 0.5 * b * (std::exp(-t / b) - std::exp((t - 1.0) / b));
  return 1.0 - 0.5 * b * (std::exp((1.0 - t) / b) - std::exp(-t / b));
}

double laplace_quantile(double u, double epsilon) {
  if (!(epsilon > 0)) throw std::invalid_argument("privacy budget must be positive");
  if (!(u > 0 && u < 1)) throw std::domain_error("laplace quantile: u must be in (0, 1)");
  const double b = 1.0 / epsilon;
  if (u < 0.5) return b * std::log(2.0 * u);
  return -b * std::log(2.0 * (1.0 - u));
}

double sample_laplace(double epsilon, Rng& rng) {
  return laplace_quantile(rng.uniform_open01(), epsilon);
}

Eigen::VectorXd privatize_vector(std::span<const double> z, const CdfModel& model, double epsilon,
                                 Rng& rng) {
  const int D = model.dim();
  if (int(z.size()) != D) throw std::invalid_argument("privatize: vector dimension mismatch");
  Eigen::VectorXd out(D);
  for (int l = 0; l < D; ++l) {
    double u = model.cdf(l, z[l], z.first(l));
    double e = sample_laplace(epsilon, rng);
    double w = g_cdf(u + e, epsilon);
    out(l) = model.quantile(l, w, std::span<const double>(out.data(), l));
  }
  return out;
}

LatentEmbedding privatize_all(const LatentEmbedding& estimates, const CdfModel& model,
                              double epsilon, uint64_t seed, int jobs) {
  const int n = estimates.n(), d = estimates.d();
  if (estimates.privatized_dim() != model.dim())
    throw std::invalid_argument("privatize: embedding and model dimensions differ");
  Eigen::MatrixXd aug = estimates.augmented();

  LatentEmbedding out;
  out.z = Eigen::MatrixXd::Zero(n, d);
  if (estimates.alpha) out.alpha = Eigen::VectorXd::Zero(n);

  parallel_for(n, jobs, [&](int64_t i) {
    Rng rng(derive_seed(seed, "dip-node", uint64_t(i)));
    Eigen::VectorXd row = aug.row(i);
    Eigen::VectorXd priv =
        privatize_vector(std::span<const double>(row.data(), row.size()), model, epsilon, rng);
    out.z.row(i) = priv.head(d).transpose();
    if (out.alpha) (*out.alpha)(i) = priv(d);
  });
  return out;
}

}  // namespace grand
