#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "grand/latent_model.hpp"
#include "grand/rng.hpp"

namespace grand {

enum class Kernel { Gaussian, Epanechnikov };

struct PrivacyBudget {
  double epsilon = 1.0;
};

// Smoothing bandwidth (log m)^(-c).
double cdf_bandwidth(double m, double c);

// Sequential conditional CDF model built from hold-out latent estimates.
// Coordinate l is modeled given coordinates 0..l-1 by a kernel-weighted
// empirical CDF: weights come from a product kernel on the conditioning
// coordinates; coordinate 0 uses unit weights. Offsets, when present, are
// appended as the final coordinate.
class CdfModel {
 public:
  static CdfModel fit(const LatentEmbedding& holdout, Kernel kernel = Kernel::Gaussian,
                      double bandwidth_exponent = 1.0, double regularizer = 1e-12);

  int dim() const { return int(sample_.cols()); }
  int sample_size() const { return int(sample_.rows()); }
  double bandwidth() const { return h_; }
  Kernel kernel() const { return kernel_; }
  bool small_sample() const { return small_sample_; }

  // Nondecreasing and right-continuous in x; range within [0, 1].
  double cdf(int coord, double x, std::span<const double> cond) const;
  // Piecewise-linear generalized inverse between weighted order statistics,
  // clamped to the sample range of the coordinate.
  double quantile(int coord, double q, std::span<const double> cond) const;

 private:
  Eigen::MatrixXd sample_;                 // m x D
  std::vector<std::vector<int32_t>> order_;  // per-coordinate ascending sample order
  Kernel kernel_ = Kernel::Gaussian;
  double h_ = 0.0;
  double reg_ = 0.0;
  bool small_sample_ = false;

  void weights(int coord, std::span<const double> cond, std::vector<double>& w) const;
};

// CDF of U(0,1) + Laplace(0, 1/epsilon); strictly increasing, symmetric about
// (1/2, 1/2).
double g_cdf(double t, double epsilon);

// Laplace(0, 1/epsilon) quantile; u = 1/2 maps to 0.
double laplace_quantile(double u, double epsilon);
double sample_laplace(double epsilon, Rng& rng);

// One coordinate chain step with an arbitrary reference CDF and inverse:
// z -> Finv(g_cdf(F(z) + e)). With the true CDF the output has the reference
// law exactly, independent of epsilon.
template <class Cdf, class Quantile>
double privatize_scalar(double z, Cdf&& F, Quantile&& Finv, double epsilon, Rng& rng) {
  double u = F(z);
  double e = sample_laplace(epsilon, rng);
  return Finv(g_cdf(u + e, epsilon));
}

// Coordinate-sequential privatization of one latent vector. The forward CDF
// conditions on the original preceding coordinates; the inverse conditions on
// the already-privatized ones.
Eigen::VectorXd privatize_vector(std::span<const double> z, const CdfModel& model, double epsilon,
                                 Rng& rng);

// Every node gets its own noise stream derived from (seed, node index), so
// results are independent of traversal order and parallelism.
LatentEmbedding privatize_all(const LatentEmbedding& estimates, const CdfModel& model,
                              double epsilon, uint64_t seed, int jobs = 1);

}  // namespace grand
