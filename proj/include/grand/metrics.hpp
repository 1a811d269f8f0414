#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "grand/graph.hpp"

namespace grand {

std::vector<int64_t> degrees(const Graph& g);

// Unordered neighbor pairs per node, deg*(deg-1)/2. Counts every centered
// two-path, triangles included.
std::vector<int64_t> vshape_counts(const Graph& g);

// Triangles through each node.
std::vector<int64_t> triangle_counts(const Graph& g);

// Leading adjacency eigenvector, unit 2-norm, entry sum >= 0. Power iteration
// initialized with the degree vector; ties in the leading eigenvalue resolve
// to the degree-vector projection onto the leading eigenspace. Edgeless
// graphs return the zero vector.
Eigen::VectorXd eigen_centrality(const Graph& g, double tol = 1e-10, int max_iters = 1000);

// Reciprocal of the sum of shortest-path distances to reachable peers;
// 0 when a node has no reachable peers.
std::vector<double> harmonic_centrality(const Graph& g, int jobs = 1);

struct Motif {
  int r = 0;
  std::vector<std::pair<int, int>> edges;

  static Motif edge();
  static Motif vshape();
  static Motif triangle();
  static Motif threestar();
};

struct MotifDensity {
  double value = 0.0;
  double std_error = 0.0;  // 0 for exact counts
  bool exact = true;
};

struct MotifOptions {
  bool induced = true;            // indicator of isomorphism vs containment
  int64_t exact_subset_budget = 20000000;
  int64_t sample_size = 1000000;  // subsets drawn when exact counting is off the table
  uint64_t seed = 1;
};

// Fraction of r-node subsets whose induced subgraph matches the motif.
// Exact for r <= 3 at any size and for r = 4 up to 5000 nodes (connected
// motif search); otherwise estimated by uniform subset sampling with a
// standard error.
MotifDensity motif_density(const Graph& g, const Motif& motif, const MotifOptions& opts = {});

// First Wasserstein distance between empirical distributions with uniform
// weights; lengths may differ.
double wasserstein1(std::span<const double> a, std::span<const double> b);

std::vector<double> log1p_transform(std::span<const double> xs);

inline constexpr std::array<const char*, 5> kLocalStatNames = {
    "degree", "vshape", "triangle", "eigen_centrality", "harmonic_centrality"};

struct LocalStats {
  std::vector<double> degree, vshape, triangle, eigen, harmonic;
  const std::vector<double>& by_index(int k) const;
};

LocalStats compute_local_stats(const Graph& g, int jobs = 1);
void write_local_stats_csv(const LocalStats& stats, std::ostream& out);

// Per-statistic distances between two graphs' local statistic distributions;
// log_flags selects the log1p domain per statistic.
std::array<double, 5> stat_distances(const LocalStats& a, const LocalStats& b,
                                     const std::array<bool, 5>& log_flags);

inline constexpr std::array<bool, 5> kDefaultLogFlags = {true, true, true, false, false};

}  // namespace grand
