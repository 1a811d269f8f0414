#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "grand/dip.hpp"
#include "support/oracles.hpp"

using namespace grand;

namespace {

// {1,2,3,4,5} duplicated to meet the minimum sample size; every empirical
// CDF level of the five distinct values is unchanged.
CdfModel five_point_model(Kernel k = Kernel::Gaussian) {
  LatentEmbedding h;
  h.z = Eigen::MatrixXd(10, 1);
  h.z << 1, 1, 2, 2, 3, 3, 4, 4, 5, 5;
  return CdfModel::fit(h, k);
}

LatentEmbedding normal_sample(int m, uint64_t seed) {
  LatentEmbedding h;
  h.z = Eigen::MatrixXd(m, 1);
  Rng rng(seed);
  for (int i = 0; i < m; ++i) h.z(i, 0) = rng.normal();
  return h;
}

}  // namespace

TEST_CASE("bandwidth formula") {
  CHECK(cdf_bandwidth(1000, 1.0) == doctest::Approx(1.0 / std::log(1000.0)).epsilon(1e-12));
  CHECK(cdf_bandwidth(1000, 1.0) == doctest::Approx(0.144764827).epsilon(1e-8));
  CHECK(cdf_bandwidth(std::exp(2.0), 1.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(cdf_bandwidth(100, 2.0) == doctest::Approx(std::pow(std::log(100.0), -2.0)));
  CHECK_THROWS_AS(cdf_bandwidth(1.0, 1.0), std::invalid_argument);
}

TEST_CASE("cdf model fit validation") {
  LatentEmbedding tiny;
  tiny.z = Eigen::MatrixXd::Zero(5, 1);
  CHECK_THROWS_AS(CdfModel::fit(tiny), std::invalid_argument);

  LatentEmbedding bad;
  bad.z = Eigen::MatrixXd::Zero(20, 1);
  bad.z(3, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(CdfModel::fit(bad), std::invalid_argument);

  CdfModel small = five_point_model();
  CHECK(small.small_sample());
  CHECK(small.dim() == 1);
  CHECK(small.sample_size() == 10);
  CHECK(small.bandwidth() == doctest::Approx(std::pow(std::log(10.0), -1.0)));

  LatentEmbedding big = normal_sample(150, 4);
  CHECK_FALSE(CdfModel::fit(big).small_sample());
}

TEST_CASE("first-coordinate cdf is the empirical cdf") {
  CdfModel m = five_point_model();
  CHECK(m.cdf(0, 3.0, {}) == doctest::Approx(0.6).epsilon(1e-9));
  CHECK(m.cdf(0, 0.5, {}) == doctest::Approx(0.0));
  CHECK(m.cdf(0, 5.0, {}) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(m.cdf(0, 99.0, {}) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(m.cdf(0, 2.999, {}) == doctest::Approx(0.4).epsilon(1e-9));
}

TEST_CASE("first-coordinate quantile inverts the empirical cdf") {
  CdfModel m = five_point_model();
  CHECK(m.quantile(0, 0.6, {}) == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(m.quantile(0, 0.0, {}) == doctest::Approx(1.0));
  CHECK(m.quantile(0, 1.0, {}) == doctest::Approx(5.0));
  // Levels between attained steps interpolate linearly between order stats.
  CHECK(m.quantile(0, 0.5, {}) == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(m.quantile(0, 0.45, {}) == doctest::Approx(2.5).epsilon(1e-6));
}

TEST_CASE("degenerate one-point sample gives step functions") {
  LatentEmbedding h;
  h.z = Eigen::MatrixXd::Constant(12, 1, 2.5);
  CdfModel m = CdfModel::fit(h);
  CHECK(m.cdf(0, 2.4999, {}) == doctest::Approx(0.0));
  CHECK(m.cdf(0, 2.5, {}) == doctest::Approx(1.0).epsilon(1e-9));
  for (double q : {0.0, 0.3, 0.7, 1.0}) CHECK(m.quantile(0, q, {}) == doctest::Approx(2.5));
}

TEST_CASE("conditioning concentrates the second coordinate") {
  // First coordinates are hundreds of bandwidths apart, so conditioning on one
  // sample point turns the second-coordinate CDF into a step there.
  const int n = 10;
  LatentEmbedding h;
  h.z = Eigen::MatrixXd(n, 2);
  for (int i = 0; i < n; ++i) {
    h.z(i, 0) = 1000.0 * i;
    h.z(i, 1) = i;
  }
  for (Kernel k : {Kernel::Gaussian, Kernel::Epanechnikov}) {
    CdfModel m = CdfModel::fit(h, k);
    std::vector<double> cond = {3000.0};  // sits on sample point i=3
    CHECK(m.cdf(1, 2.999, cond) < 1e-9);
    CHECK(m.cdf(1, 3.0, cond) > 1.0 - 1e-9);
    CHECK(m.quantile(1, 0.5, cond) == doctest::Approx(3.0).epsilon(1e-9));
  }
}

TEST_CASE("conditional cdf matches a direct weighted-sum oracle") {
  LatentEmbedding h = normal_sample(40, 9);
  h.z.conservativeResize(40, 2);
  Rng rng(10);
  for (int i = 0; i < 40; ++i) h.z(i, 1) = rng.normal();
  CdfModel m = CdfModel::fit(h);
  const double hband = m.bandwidth();

  std::vector<double> cond = {0.3};
  for (double x : {-1.5, -0.2, 0.0, 0.4, 2.0}) {
    double num = 0, den = 1e-12;
    for (int i = 0; i < 40; ++i) {
      double u = (cond[0] - h.z(i, 0)) / hband;
      double w = 0.3989422804014327 * std::exp(-0.5 * u * u);
      den += w;
      if (h.z(i, 1) <= x) num += w;
    }
    CHECK(m.cdf(1, x, cond) == doctest::Approx(num / den).epsilon(1e-12));
  }
}

TEST_CASE("cdf and quantile are monotone") {
  LatentEmbedding h = normal_sample(60, 21);
  h.z.conservativeResize(60, 2);
  Rng rng(22);
  for (int i = 0; i < 60; ++i) h.z(i, 1) = 0.5 * h.z(i, 0) + rng.normal();
  CdfModel m = CdfModel::fit(h);
  std::vector<double> cond = {0.25};

  double prev = -1;
  for (double x = -4; x <= 4; x += 0.05) {
    double u = m.cdf(1, x, cond);
    CHECK(u >= prev - 1e-15);
    CHECK(u >= 0.0);
    CHECK(u <= 1.0);
    prev = u;
  }
  prev = -std::numeric_limits<double>::infinity();
  for (double q = 0; q <= 1.0 + 1e-12; q += 0.01) {
    double x = m.quantile(1, q, cond);
    CHECK(x >= prev - 1e-15);
    prev = x;
  }
}

TEST_CASE("quantile of cdf round-trips within one inter-sample gap") {
  LatentEmbedding h = normal_sample(50, 33);
  CdfModel m = CdfModel::fit(h);
  std::vector<double> sorted(h.z.data(), h.z.data() + 50);
  std::sort(sorted.begin(), sorted.end());
  double gap = 0;
  for (int i = 1; i < 50; ++i) gap = std::max(gap, sorted[i] - sorted[i - 1]);
  for (int i = 0; i < 50; ++i) {
    double x = h.z(i, 0);
    double back = m.quantile(0, m.cdf(0, x, {}), {});
    CHECK(std::abs(back - x) <= gap + 1e-12);
  }
}

TEST_CASE("noise cdf closed form") {
  for (double eps : {0.3, 1.0, 7.0}) CHECK(g_cdf(0.5, eps) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(g_cdf(0.3, 1000.0) == doctest::Approx(0.3).epsilon(1e-3));
  CHECK_THROWS_AS(g_cdf(0.5, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(g_cdf(0.5, -1.0), std::invalid_argument);

  // Strictly increasing over a wide range.
  double prev = -1;
  for (double t = -3; t <= 4; t += 0.05) {
    double v = g_cdf(t, 1.0);
    CHECK(v > prev);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    prev = v;
  }
}

TEST_CASE("noise cdf matches the quadrature oracle") {
  CHECK(std::abs(g_cdf(-2.0, 1.0) - oracle::uniform_laplace_cdf_quadrature(-2.0, 1.0)) < 1e-6);
  for (double eps : {0.5, 1.0, 2.0, 10.0}) {
    for (int k = 0; k < 50; ++k) {
      double t = -2.0 + 5.0 * k / 49.0;
      double ours = g_cdf(t, eps);
      double ref = oracle::uniform_laplace_cdf_quadrature(t, eps);
      CHECK(std::abs(ours - ref) < 1e-6);
    }
  }
}

TEST_CASE("laplace quantile and sampling") {
  CHECK(laplace_quantile(0.5, 1.0) == doctest::Approx(0.0));
  CHECK(laplace_quantile(0.5, 3.7) == doctest::Approx(0.0));
  CHECK(laplace_quantile(0.25, 2.0) == doctest::Approx(-laplace_quantile(0.75, 2.0)).epsilon(1e-12));
  CHECK_THROWS_AS(laplace_quantile(0.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(laplace_quantile(1.0, 1.0), std::domain_error);

  // Quantile inverts the distribution function.
  for (double u : {0.01, 0.2, 0.5, 0.8, 0.99}) {
    double x = laplace_quantile(u, 2.0);
    CHECK(oracle::laplace_cdf(x, 0.5) == doctest::Approx(u).epsilon(1e-10));
  }

  // Sample variance of 10^6 draws within 2% of 2/eps^2.
  const double eps = 1.0;
  Rng rng(123);
  double s1 = 0, s2 = 0;
  const int N = 1000000;
  for (int i = 0; i < N; ++i) {
    double x = sample_laplace(eps, rng);
    s1 += x;
    s2 += x * x;
  }
  double var = s2 / N - (s1 / N) * (s1 / N);
  CHECK(std::abs(var - 2.0) < 0.04);

  Rng a(7), b(7);
  for (int i = 0; i < 10; ++i) CHECK(sample_laplace(eps, a) == sample_laplace(eps, b));
}

TEST_CASE("privatization is near identity for huge budgets") {
  LatentEmbedding h;
  h.z = Eigen::MatrixXd(10, 1);
  h.z << 1, 2, 3, 4, 5, 6, 7, 8, 9, 10;
  CdfModel m = CdfModel::fit(h);
  Rng rng(2);
  std::vector<double> z = {7.0};
  Eigen::VectorXd out = privatize_vector(z, m, 1e6, rng);
  CHECK(std::abs(out(0) - 7.0) <= 1.0 + 1e-9);  // within one inter-sample gap
}

TEST_CASE("privatization composes cdf, noise, and quantile") {
  CdfModel m = five_point_model();
  const double eps = 1.0;
  const uint64_t seed = 555;

  Rng noise(seed);
  double e = sample_laplace(eps, noise);
  double expected = m.quantile(0, g_cdf(m.cdf(0, 3.0, {}) + e, eps), {});

  Rng rng(seed);
  std::vector<double> z = {3.0};
  Eigen::VectorXd out = privatize_vector(z, m, eps, rng);
  CHECK(out(0) == expected);
  CHECK(out(0) >= 1.0);
  CHECK(out(0) <= 5.0);
}

TEST_CASE("privatized outputs stay inside the sample range") {
  LatentEmbedding h = normal_sample(80, 44);
  CdfModel m = CdfModel::fit(h);
  double lo = h.z.minCoeff(), hi = h.z.maxCoeff();
  Rng rng(45);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> z = {rng.uniform(-5.0, 5.0)};
    Eigen::VectorXd out = privatize_vector(z, m, 0.5, rng);
    CHECK(out(0) >= lo - 1e-12);
    CHECK(out(0) <= hi + 1e-12);
  }
}

TEST_CASE("per-node noise streams make privatize_all order-independent") {
  LatentEmbedding h = normal_sample(120, 50);
  h.z.conservativeResize(120, 2);
  Rng rng(51);
  for (int i = 0; i < 120; ++i) h.z(i, 1) = rng.normal();
  CdfModel m = CdfModel::fit(h);

  LatentEmbedding est;
  est.z = Eigen::MatrixXd(6, 2);
  for (int i = 0; i < 6; ++i)
    for (int l = 0; l < 2; ++l) est.z(i, l) = rng.normal();

  const uint64_t seed = 99;
  LatentEmbedding serial = privatize_all(est, m, 1.0, seed, 1);
  LatentEmbedding threaded = privatize_all(est, m, 1.0, seed, 4);
  CHECK((serial.z.array() == threaded.z.array()).all());

  // Row i is exactly privatize_vector under its own derived stream.
  for (int i = 0; i < 6; ++i) {
    Rng node(derive_seed(seed, "dip-node", uint64_t(i)));
    Eigen::VectorXd row = est.z.row(i);
    Eigen::VectorXd expect =
        privatize_vector(std::span<const double>(row.data(), 2), m, 1.0, node);
    CHECK((serial.z.row(i).transpose() - expect).norm() == 0.0);
  }

  LatentEmbedding empty;
  empty.z = Eigen::MatrixXd(0, 2);
  LatentEmbedding out = privatize_all(empty, m, 1.0, seed, 1);
  CHECK(out.n() == 0);
}

TEST_CASE("oracle-cdf privatization preserves a normal law") {
  // With the true CDF, outputs are exactly the reference law, independent of
  // epsilon; checked with a two-sample KS test per budget.
  const int n = 3000;
  auto F = [](double x) { return oracle::normal_cdf(x); };
  auto Finv = [](double p) { return oracle::normal_quantile(std::clamp(p, 1e-15, 1 - 1e-15)); };
  for (double eps : {1.0, 5.0}) {
    Rng rng(uint64_t(eps * 1000 + 7));
    std::vector<double> priv(n), fresh(n);
    for (int i = 0; i < n; ++i) priv[i] = privatize_scalar(rng.normal(), F, Finv, eps, rng);
    for (int i = 0; i < n; ++i) fresh[i] = rng.normal();
    double d = oracle::ks_two_sample_stat(priv, fresh);
    CHECK(d < oracle::ks_two_sample_critical(0.01, n, n));
  }
}

TEST_CASE("estimated-cdf privatization stays close to the true law") {
  // Sup distance between the privatized empirical CDF and the true normal CDF
  // stays small once the fitting sample is large.
  const int n_out = 4000;
  const double eps = 2.0;
  std::vector<double> sups;
  for (uint64_t seed = 1; seed <= 10; ++seed) {
    CdfModel model = CdfModel::fit(normal_sample(4000, seed * 191 + 7));
    LatentEmbedding est = normal_sample(n_out, seed * 977 + 13);
    LatentEmbedding priv = privatize_all(est, model, eps, seed * 31 + 5, 1);
    std::vector<double> xs(priv.z.data(), priv.z.data() + n_out);
    std::sort(xs.begin(), xs.end());
    double sup = 0;
    for (double g = -3.0; g <= 3.0; g += 0.03) {
      double ecdf = double(std::upper_bound(xs.begin(), xs.end(), g) - xs.begin()) / n_out;
      sup = std::max(sup, std::abs(ecdf - oracle::normal_cdf(g)));
    }
    sups.push_back(sup);
  }
  std::nth_element(sups.begin(), sups.begin() + 5, sups.end());
  CHECK(sups[5] < 0.05);
}

TEST_CASE("estimated-cdf privatization converges to the oracle transform") {
  // Same inputs and same noise through the fitted transform and the exact
  // normal cdf/quantile transform; the mean output gap is pure estimation
  // error and shrinks as the fitting sample quadruples.
  const int n_out = 2000;
  const double eps = 2.0;
  auto F = [](double x) { return oracle::normal_cdf(x); };
  auto Finv = [](double p) { return oracle::normal_quantile(std::clamp(p, 1e-12, 1.0 - 1e-12)); };
  auto median_gap = [&](int m_fit) {
    std::vector<double> gaps;
    for (uint64_t seed = 1; seed <= 10; ++seed) {
      CdfModel model = CdfModel::fit(normal_sample(m_fit, seed * 191 + 7));
      Rng draw(seed * 977 + 13);
      double gap = 0;
      for (int i = 0; i < n_out; ++i) {
        double z = draw.normal();
        Rng noise_est(derive_seed(seed * 31 + 5, "case", uint64_t(i)));
        Rng noise_true(derive_seed(seed * 31 + 5, "case", uint64_t(i)));
        double via_est =
            privatize_vector(std::span<const double>(&z, 1), model, eps, noise_est)(0);
        double via_true = privatize_scalar(z, F, Finv, eps, noise_true);
        gap += std::abs(via_est - via_true);
      }
      gaps.push_back(gap / n_out);
    }
    std::nth_element(gaps.begin(), gaps.begin() + 5, gaps.end());
    return gaps[5];
  };
  double g250 = median_gap(250);
  double g1000 = median_gap(1000);
  double g4000 = median_gap(4000);
  CHECK(g4000 < 0.08);
  CHECK(g250 > g1000);
  CHECK(g1000 > g4000);
}
