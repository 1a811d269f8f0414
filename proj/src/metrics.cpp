#include "grand/metrics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "grand/parallel.hpp"
#include "grand/rng.hpp"

namespace grand {

std::vector<int64_t> degrees(const Graph& g) {
  std::vector<int64_t> out(g.num_nodes());
  for (int i = 0; i < g.num_nodes(); ++i) out[i] = g.degree(i);
  return out;
}

std::vector<int64_t> vshape_counts(const Graph& g) {
  std::vector<int64_t> out(g.num_nodes());
  for (int i = 0; i < g.num_nodes(); ++i) {
    int64_t d = g.degree(i);
    out[i] = d * (d - 1) / 2;
  }
  return out;
}

std::vector<int64_t> triangle_counts(const Graph& g) {
  const int n = g.num_nodes();
  std::vector<int64_t> out(n, 0);
  if (g.is_dense()) {
    const int words = g.words_per_row();
    for (int i = 0; i < n; ++i) {
      const uint64_t* ri = g.row_words(i);
      int64_t twice = 0;
      for (int32_t j : g.neighbors(i)) {
        const uint64_t* rj = g.row_words(j);
        for (int w = 0; w < words; ++w) twice += std::popcount(ri[w] & rj[w]);
      }
      out[i] = twice / 2;  // each triangle through i seen via both other corners
    }
  } else {
    for (int i = 0; i < n; ++i) {
      auto nb = g.neighbors(i);
      int64_t t = 0;
      for (size_t a = 0; a < nb.size(); ++a)
        for (size_t b = a + 1; b < nb.size(); ++b)
          if (g.has_edge(nb[a], nb[b])) ++t;
      out[i] = t;
    }
  }
  return out;
}

Eigen::VectorXd eigen_centrality(const Graph& g, double tol, int max_iters) {
  const int n = g.num_nodes();
  if (n == 0) return Eigen::VectorXd();
  if (g.num_edges() == 0) return Eigen::VectorXd::Zero(n);

  std::vector<std::vector<int32_t>> adj(n);
  for (int i = 0; i < n; ++i) adj[i] = g.neighbors(i);
  auto matvec = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
      double s = 0;
      for (int32_t j : adj[i]) s += x(j);
      y(i) = s;
    }
    return y;
  };

  Eigen::VectorXd x(n);
  for (int i = 0; i < n; ++i) x(i) = double(g.degree(i));
  x.normalize();
  if (x.sum() < 0) x = -x;

  bool converged = false;
  for (int it = 0; it < max_iters; ++it) {
    // Shift by +1: alternating spectra (bipartite graphs) would otherwise
    // oscillate; the leading eigenvector is unchanged.
    Eigen::VectorXd y = matvec(x) + x;
    double norm = y.norm();
    if (norm == 0) return Eigen::VectorXd::Zero(n);
    y /= norm;
    if (y.sum() < 0) y = -y;
    double diff = (y - x).lpNorm<Eigen::Infinity>();
    x = std::move(y);
    if (diff < tol) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    Eigen::VectorXd Ax = matvec(x);
    double lambda = x.dot(Ax);
    throw std::runtime_error("eigen centrality: power iteration did not converge, residual " +
                             std::to_string((Ax - lambda * x).norm()));
  }
  return x;
}

std::vector<double> harmonic_centrality(const Graph& g, int jobs) {
  const int n = g.num_nodes();
  std::vector<std::vector<int32_t>> adj(n);
  for (int i = 0; i < n; ++i) adj[i] = g.neighbors(i);
  std::vector<double> out(n, 0.0);
  parallel_for(n, jobs, [&](int64_t src) {
    std::vector<int32_t> dist(n, -1);
    std::vector<int32_t> queue;
    queue.reserve(64);
    queue.push_back(int32_t(src));
    dist[src] = 0;
    int64_t sum = 0;
    size_t head = 0;
    while (head < queue.size()) {
      int32_t u = queue[head++];
      for (int32_t v : adj[u]) {
        if (dist[v] < 0) {
          dist[v] = dist[u] + 1;
          sum += dist[v];
          queue.push_back(v);
        }
      }
    }
    out[src] = sum > 0 ? 1.0 / double(sum) : 0.0;
  });
  return out;
}

Motif Motif::edge() { return {2, {{0, 1}}}; }
Motif Motif::vshape() { return {3, {{0, 1}, {1, 2}}}; }
Motif Motif::triangle() { return {3, {{0, 1}, {1, 2}, {0, 2}}}; }
Motif Motif::threestar() { return {4, {{0, 1}, {0, 2}, {0, 3}}}; }

namespace {

int pair_count(int r) { return r * (r - 1) / 2; }

// Bit index of unordered pair (a, b), a < b, pairs in lexicographic order.
int pair_bit(int r, int a, int b) {
  int idx = 0;
  for (int i = 0; i < r; ++i)
    for (int j = i + 1; j < r; ++j, ++idx)
      if (i == a && j == b) return idx;
  throw std::logic_error("pair_bit: bad pair");
}

std::vector<std::vector<int>> all_permutations(int r) {
  std::vector<int> perm(r);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::vector<int>> out;
  do {
    out.push_back(perm);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

uint32_t remap_mask(uint32_t mask, int r, const std::vector<int>& perm) {
  uint32_t out = 0;
  for (int a = 0; a < r; ++a)
    for (int b = a + 1; b < r; ++b) {
      if (!(mask >> pair_bit(r, a, b) & 1)) continue;
      int pa = perm[a], pb = perm[b];
      if (pa > pb) std::swap(pa, pb);
      out |= 1u << pair_bit(r, pa, pb);
    }
  return out;
}

struct MotifTables {
  int r;
  uint32_t motif_mask;
  std::vector<uint32_t> canon;       // canonical form per induced mask
  std::vector<uint8_t> is_match;     // canonical equality with motif
  std::vector<uint8_t> does_contain; // some permutation of motif fits inside mask
};

MotifTables build_tables(const Motif& motif) {
  const int r = motif.r;
  const int bits = pair_count(r);
  uint32_t mmask = 0;
  for (auto [a, b] : motif.edges) {
    if (a == b) throw std::invalid_argument("motif: self-loop");
    if (a > b) std::swap(a, b);
    if (a < 0 || b >= r) throw std::invalid_argument("motif: vertex out of range");
    mmask |= 1u << pair_bit(r, a, b);
  }
  auto perms = all_permutations(r);
  MotifTables t;
  t.r = r;
  t.motif_mask = mmask;
  const uint32_t total = 1u << bits;
  t.canon.resize(total);
  t.is_match.resize(total);
  t.does_contain.resize(total);
  std::vector<uint32_t> motif_images;
  for (const auto& p : perms) motif_images.push_back(remap_mask(mmask, r, p));
  uint32_t motif_canon = *std::min_element(motif_images.begin(), motif_images.end());
  for (uint32_t mask = 0; mask < total; ++mask) {
    uint32_t c = mask;
    for (const auto& p : perms) c = std::min(c, remap_mask(mask, r, p));
    t.canon[mask] = c;
    t.is_match[mask] = (c == motif_canon);
    bool contains = false;
    for (uint32_t img : motif_images)
      if ((mask & img) == img) {
        contains = true;
        break;
      }
    t.does_contain[mask] = contains;
  }
  return t;
}

bool motif_is_connected(const Motif& motif) {
  std::vector<std::vector<int>> adj(motif.r);
  for (auto [a, b] : motif.edges) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  std::vector<uint8_t> seen(motif.r, 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int cnt = 1;
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    for (int v : adj[u])
      if (!seen[v]) {
        seen[v] = 1;
        ++cnt;
        stack.push_back(v);
      }
  }
  return cnt == motif.r;
}

uint32_t subset_mask(const Graph& g, const int32_t* v, int r) {
  uint32_t mask = 0;
  int bit = 0;
  for (int a = 0; a < r; ++a)
    for (int b = a + 1; b < r; ++b, ++bit)
      if (g.has_edge(v[a], v[b])) mask |= 1u << bit;
  return mask;
}

long double binom_ld(int64_t n, int r) {
  if (n < r) return 0;
  long double v = 1;
  for (int k = 0; k < r; ++k) v = v * (long double)(n - k) / (k + 1);
  return v;
}

// Triple class counts from degree sums and triangle totals; exact at any size.
// Classes keyed by edge count, which determines the 3-node graph up to
// isomorphism.
std::array<long double, 4> triple_counts_by_edges(const Graph& g) {
  const int64_t n = g.num_nodes();
  const int64_t m = g.num_edges();
  long double wedges = 0;
  for (int i = 0; i < n; ++i) {
    long double d = g.degree(i);
    wedges += d * (d - 1) / 2;
  }
  auto tri = triangle_counts(g);
  long double t = 0;
  for (int64_t v : tri) t += v;
  t /= 3;
  std::array<long double, 4> c{};
  c[3] = t;
  c[2] = wedges - 3 * t;
  c[1] = (long double)m * (n - 2) - 2 * c[2] - 3 * c[3];
  c[0] = binom_ld(n, 3) - c[1] - c[2] - c[3];
  return c;
}

// ESU: enumerate every connected induced r-subgraph exactly once, counting
// occurrences per induced-mask class.
void esu_counts(const Graph& g, int r, std::vector<int64_t>& class_counts) {
  const int n = g.num_nodes();
  std::vector<std::vector<int32_t>> adj(n);
  for (int i = 0; i < n; ++i) adj[i] = g.neighbors(i);
  std::vector<uint8_t> in_sub(n, 0), in_hood(n, 0);
  std::vector<int32_t> sub;
  sub.reserve(r);

  std::function<void(std::vector<int32_t>&, int32_t)> extend = [&](std::vector<int32_t>& ext,
                                                                   int32_t root) {
    if (int(sub.size()) == r) {
      uint32_t mask = subset_mask(g, sub.data(), r);
      ++class_counts[mask];
      return;
    }
    while (!ext.empty()) {
      int32_t w = ext.back();
      ext.pop_back();
      std::vector<int32_t> next_ext = ext;
      std::vector<int32_t> newly;
      for (int32_t u : adj[w])
        if (u > root && !in_sub[u] && !in_hood[u]) {
          next_ext.push_back(u);
          in_hood[u] = 1;
          newly.push_back(u);
        }
      sub.push_back(w);
      in_sub[w] = 1;
      extend(next_ext, root);
      in_sub[w] = 0;
      sub.pop_back();
      for (int32_t u : newly) in_hood[u] = 0;
    }
  };

  for (int32_t v = 0; v < n; ++v) {
    std::vector<int32_t> ext;
    for (int32_t u : adj[v])
      if (u > v) {
        ext.push_back(u);
        in_hood[u] = 1;
      }
    sub.push_back(v);
    in_sub[v] = 1;
    std::vector<int32_t> hood = ext;
    extend(ext, v);
    in_sub[v] = 0;
    sub.pop_back();
    for (int32_t u : hood) in_hood[u] = 0;
  }
}

}  // namespace

MotifDensity motif_density(const Graph& g, const Motif& motif, const MotifOptions& opts) {
  const int r = motif.r;
  if (r < 2 || r > 5) throw std::invalid_argument("motif: order must be between 2 and 5");
  const int64_t n = g.num_nodes();
  if (n < r) throw std::invalid_argument("motif: order exceeds the node count");
  MotifDensity out;

  MotifTables tables = build_tables(motif);
  auto hit = [&](uint32_t mask) {
    return opts.induced ? bool(tables.is_match[mask]) : bool(tables.does_contain[mask]);
  };

  if (r == 2) {
    long double total = binom_ld(n, 2);
    long double cnt = hit(1) ? (long double)g.num_edges() : 0;
    if (hit(0)) cnt += total - (long double)g.num_edges();
    out.value = double(cnt / total);
    return out;
  }

  if (r == 3) {
    auto by_edges = triple_counts_by_edges(g);
    // For 3-node masks the class is the popcount; representative masks by
    // edge count: 0, 1, 3 (two edges sharing a node), 7.
    const uint32_t reps[4] = {0u, 1u, 3u, 7u};
    long double cnt = 0;
    for (int e = 0; e <= 3; ++e)
      if (hit(reps[e])) cnt += by_edges[e];
    out.value = double(cnt / binom_ld(n, 3));
    return out;
  }

  long double total = binom_ld(n, r);
  if (total <= (long double)opts.exact_subset_budget) {
    int64_t cnt = 0;
    int32_t v[5];
    if (r == 4) {
      for (v[0] = 0; v[0] < n; ++v[0])
        for (v[1] = v[0] + 1; v[1] < n; ++v[1])
          for (v[2] = v[1] + 1; v[2] < n; ++v[2])
            for (v[3] = v[2] + 1; v[3] < n; ++v[3])
              if (hit(subset_mask(g, v, 4))) ++cnt;
    } else {
      for (v[0] = 0; v[0] < n; ++v[0])
        for (v[1] = v[0] + 1; v[1] < n; ++v[1])
          for (v[2] = v[1] + 1; v[2] < n; ++v[2])
            for (v[3] = v[2] + 1; v[3] < n; ++v[3])
              for (v[4] = v[3] + 1; v[4] < n; ++v[4])
                if (hit(subset_mask(g, v, 5))) ++cnt;
    }
    out.value = double((long double)cnt / total);
    return out;
  }

  if (r == 4 && n <= 5000 && motif_is_connected(motif)) {
    // A connected motif can only match (or span) a connected induced
    // subgraph, so enumerating those is exhaustive.
    std::vector<int64_t> class_counts(1u << pair_count(4), 0);
    esu_counts(g, 4, class_counts);
    long double cnt = 0;
    for (uint32_t mask = 0; mask < class_counts.size(); ++mask)
      if (class_counts[mask] && hit(mask)) cnt += class_counts[mask];
    out.value = double(cnt / total);
    return out;
  }

  // Sampling estimator over uniform r-subsets.
  Rng rng(opts.seed);
  int64_t hits = 0;
  int32_t v[5];
  for (int64_t s = 0; s < opts.sample_size; ++s) {
    int filled = 0;
    while (filled < r) {
      int32_t cand = int32_t(rng.uniform_int(0, n - 1));
      bool dup = false;
      for (int k = 0; k < filled; ++k) dup |= (v[k] == cand);
      if (!dup) v[filled++] = cand;
    }
    std::sort(v, v + r);
    if (hit(subset_mask(g, v, r))) ++hits;
  }
  double p = double(hits) / double(opts.sample_size);
  out.value = p;
  out.std_error = std::sqrt(p * (1.0 - p) / double(opts.sample_size));
  out.exact = false;
  return out;
}

double wasserstein1(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty())
    throw std::invalid_argument("wasserstein: empty sample");
  std::vector<double> xs(a.begin(), a.end()), ys(b.begin(), b.end());
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
  const size_t na = xs.size(), nb = ys.size();
  if (na == nb) {
    double s = 0;
    for (size_t i = 0; i < na; ++i) s += std::abs(xs[i] - ys[i]);
    return s / double(na);
  }
  // Integrate |inverse CDF difference| over the merged quantile grid.
  double s = 0, q = 0;
  size_t ia = 0, ib = 0;
  while (ia < na && ib < nb) {
    double qa = double(ia + 1) / double(na);
    double qb = double(ib + 1) / double(nb);
    double next = std::min(qa, qb);
    s += (next - q) * std::abs(xs[ia] - ys[ib]);
    q = next;
    if (qa <= next + 1e-18) ++ia;
    if (qb <= next + 1e-18) ++ib;
  }
  return s;
}

std::vector<double> log1p_transform(std::span<const double> xs) {
  std::vector<double> out(xs.size());
  for (size_t i = 0; i < xs.size(); ++i) out[i] = std::log1p(xs[i]);
  return out;
}

const std::vector<double>& LocalStats::by_index(int k) const {
  switch (k) {
    case 0: return degree;
    case 1: return vshape;
    case 2: return triangle;
    case 3: return eigen;
    case 4: return harmonic;
  }
  throw std::out_of_range("local stats: bad index");
}

LocalStats compute_local_stats(const Graph& g, int jobs) {
  LocalStats s;
  const int n = g.num_nodes();
  auto deg = degrees(g);
  auto vsh = vshape_counts(g);
  auto tri = triangle_counts(g);
  s.degree.assign(deg.begin(), deg.end());
  s.vshape.assign(vsh.begin(), vsh.end());
  s.triangle.assign(tri.begin(), tri.end());
  Eigen::VectorXd ec = eigen_centrality(g);
  s.eigen.assign(ec.data(), ec.data() + n);
  s.harmonic = harmonic_centrality(g, jobs);
  return s;
}

void write_local_stats_csv(const LocalStats& stats, std::ostream& out) {
  out << "node";
  for (const char* name : kLocalStatNames) out << "," << name;
  out << "\n";
  out.precision(17);
  for (size_t i = 0; i < stats.degree.size(); ++i) {
    out << i;
    for (int k = 0; k < 5; ++k) out << "," << stats.by_index(k)[i];
    out << "\n";
  }
}

std::array<double, 5> stat_distances(const LocalStats& a, const LocalStats& b,
                                     const std::array<bool, 5>& log_flags) {
  std::array<double, 5> out{};
  for (int k = 0; k < 5; ++k) {
    const auto& xa = a.by_index(k);
    const auto& xb = b.by_index(k);
    if (log_flags[k]) {
      auto la = log1p_transform(xa);
      auto lb = log1p_transform(xb);
      out[k] = wasserstein1(la, lb);
    } else {
      out[k] = wasserstein1(xa, xb);
    }
  }
  return out;
}

}  // namespace grand
