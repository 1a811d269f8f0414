#include "grand/graph.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "grand/rng.hpp"

namespace grand {

BitMatrix::BitMatrix(int rows, int cols)
    : rows_(rows), cols_(cols), words_((cols + 63) / 64), bits_(size_t(rows) * words_, 0) {}

void BitMatrix::set(int i, int j, bool v) {
  uint64_t& w = bits_[size_t(i) * words_ + (j >> 6)];
  uint64_t mask = 1ULL << (j & 63);
  if (v)
    w |= mask;
  else
    w &= ~mask;
}

std::vector<uint8_t> BitMatrix::row_bytes(int i) const {
  std::vector<uint8_t> out(cols_);
  for (int j = 0; j < cols_; ++j) out[j] = get(i, j) ? 1 : 0;
  return out;
}

int64_t BitMatrix::row_sum(int i) const {
  int64_t s = 0;
  const uint64_t* w = bits_.data() + size_t(i) * words_;
  for (int k = 0; k < words_; ++k) s += std::popcount(w[k]);
  return s;
}

bool BitMatrix::row_equal(const BitMatrix& other, int i) const {
  if (cols_ != other.cols_) return false;
  const uint64_t* a = bits_.data() + size_t(i) * words_;
  const uint64_t* b = other.bits_.data() + size_t(i) * words_;
  return std::equal(a, a + words_, b);
}

Graph::Graph(int n, std::vector<std::string> labels)
    : n_(n), dense_(n <= kDenseNodeLimit), deg_(n, 0), labels_(std::move(labels)) {
  if (n < 0) throw std::invalid_argument("graph: node count must be nonnegative");
  if (!labels_.empty() && int(labels_.size()) != n)
    throw std::invalid_argument("graph: label count does not match node count");
  if (dense_) {
    words_ = (n + 63) / 64;
    bits_.assign(size_t(n) * words_, 0);
  } else {
    adj_.resize(n);
  }
}

bool Graph::has_edge(int i, int j) const {
  if (i == j) return false;
  if (dense_) return (bits_[size_t(i) * words_ + (j >> 6)] >> (j & 63)) & 1ULL;
  const auto& a = adj_[i];
  return std::binary_search(a.begin(), a.end(), int32_t(j));
}

void Graph::add_edge(int i, int j) {
  if (i < 0 || j < 0 || i >= n_ || j >= n_) throw std::out_of_range("graph: node index out of range");
  if (i == j) throw std::invalid_argument("graph: self-loops are not allowed");
  if (has_edge(i, j)) return;
  if (dense_) {
    bits_[size_t(i) * words_ + (j >> 6)] |= 1ULL << (j & 63);
    bits_[size_t(j) * words_ + (i >> 6)] |= 1ULL << (i & 63);
  } else {
    auto& ai = adj_[i];
    ai.insert(std::upper_bound(ai.begin(), ai.end(), int32_t(j)), int32_t(j));
    auto& aj = adj_[j];
    aj.insert(std::upper_bound(aj.begin(), aj.end(), int32_t(i)), int32_t(i));
  }
  ++deg_[i];
  ++deg_[j];
  ++edges_;
}

std::vector<int32_t> Graph::neighbors(int i) const {
  if (!dense_) return adj_[i];
  std::vector<int32_t> out;
  out.reserve(deg_[i]);
  const uint64_t* row = bits_.data() + size_t(i) * words_;
  for (int w = 0; w < words_; ++w) {
    uint64_t bitsw = row[w];
    while (bitsw) {
      int b = std::countr_zero(bitsw);
      out.push_back(int32_t(w * 64 + b));
      bitsw &= bitsw - 1;
    }
  }
  return out;
}

double Graph::density() const {
  if (n_ < 2) return 0.0;
  return double(edges_) / (double(n_) * (n_ - 1) / 2.0);
}

std::string Graph::label(int i) const {
  if (!labels_.empty()) return labels_[i];
  return std::to_string(i);
}

bool Graph::operator==(const Graph& other) const {
  if (n_ != other.n_ || edges_ != other.edges_) return false;
  for (int i = 0; i < n_; ++i)
    if (neighbors(i) != other.neighbors(i)) return false;
  return true;
}

namespace {

struct RawEdge {
  std::string a, b;
  int64_t lineno = 0;
};

struct RawEdges {
  std::vector<RawEdge> edges;
  int64_t header_n = -1;
  bool saw_any_line = false;
};

RawEdges read_raw(std::istream& in, EdgeListFormat format) {
  RawEdges raw;
  std::string line;
  int64_t lineno = 0;
  bool csv_header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    size_t first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    raw.saw_any_line = true;
    if (line[first] == '#') {
      size_t pos = line.find("n=");
      if (pos != std::string::npos) {
        try {
          raw.header_n = std::stoll(line.substr(pos + 2));
        } catch (const std::exception&) {
          throw std::runtime_error("edge list parse error at line " + std::to_string(lineno) +
                                   ": bad node count in header");
        }
      }
      continue;
    }
    std::string a, b;
    if (format == EdgeListFormat::Csv) {
      if (!csv_header_seen) {
        std::string h = line.substr(first);
        h.erase(std::remove_if(h.begin(), h.end(), [](char c) { return c == ' ' || c == '\t'; }), h.end());
        if (h != "src,dst")
          throw std::runtime_error("edge list parse error at line " + std::to_string(lineno) +
                                   ": expected csv header \"src,dst\"");
        csv_header_seen = true;
        continue;
      }
      size_t comma = line.find(',');
      if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos)
        throw std::runtime_error("edge list parse error at line " + std::to_string(lineno) +
                                 ": expected exactly two comma-separated fields");
      auto strip = [](std::string s) {
        size_t b0 = s.find_first_not_of(" \t");
        size_t b1 = s.find_last_not_of(" \t");
        if (b0 == std::string::npos) return std::string();
        return s.substr(b0, b1 - b0 + 1);
      };
      a = strip(line.substr(0, comma));
      b = strip(line.substr(comma + 1));
      if (a.empty() || b.empty())
        throw std::runtime_error("edge list parse error at line " + std::to_string(lineno) +
                                 ": empty endpoint");
    } else {
      std::istringstream ss(line);
      std::string extra;
      if (!(ss >> a >> b) || (ss >> extra))
        throw std::runtime_error("edge list parse error at line " + std::to_string(lineno) +
                                 ": expected exactly two tokens");
    }
    raw.edges.push_back(RawEdge{std::move(a), std::move(b), lineno});
  }
  return raw;
}

}  // namespace

LoadedGraph load_edge_list(std::istream& in, EdgeListFormat format) {
  RawEdges raw = read_raw(in, format);
  if (!raw.saw_any_line) throw std::runtime_error("edge list is empty");

  LoadedGraph out;
  if (raw.header_n >= 0) {
    // Header mode: labels are integer node ids in [0, n).
    Graph g(int(raw.header_n));
    for (const auto& [sa, sb, lineno] : raw.edges) {
      int64_t i, j;
      try {
        size_t pa = 0, pb = 0;
        i = std::stoll(sa, &pa);
        j = std::stoll(sb, &pb);
        if (pa != sa.size() || pb != sb.size()) throw std::invalid_argument("trailing chars");
      } catch (const std::exception&) {
        throw std::runtime_error("edge list parse error at line " + std::to_string(lineno) +
                                 ": \"# n=\" header requires integer node ids, got \"" + sa + " " +
                                 sb + "\"");
      }
      if (i < 0 || j < 0 || i >= raw.header_n || j >= raw.header_n)
        throw std::runtime_error("edge list parse error at line " + std::to_string(lineno) +
                                 ": node id out of range [0, " + std::to_string(raw.header_n) +
                                 ")");
      if (i == j) {
        ++out.self_loops_dropped;
        continue;
      }
      if (g.has_edge(int(i), int(j))) {
        ++out.duplicates_dropped;
        continue;
      }
      g.add_edge(int(i), int(j));
    }
    out.graph = std::move(g);
    return out;
  }

  // Label mode: dense ids assigned in first-appearance order.
  std::unordered_map<std::string, int32_t> ids;
  std::vector<std::string> labels;
  std::vector<std::pair<int32_t, int32_t>> edges;
  auto intern = [&](const std::string& s) {
    auto it = ids.find(s);
    if (it != ids.end()) return it->second;
    int32_t id = int32_t(labels.size());
    ids.emplace(s, id);
    labels.push_back(s);
    return id;
  };
  for (const auto& [sa, sb, lineno] : raw.edges) {
    (void)lineno;
    int32_t i = intern(sa);
    int32_t j = intern(sb);
    if (i == j) {
      ++out.self_loops_dropped;
      continue;
    }
    edges.emplace_back(i, j);
  }
  const int n_nodes = int(labels.size());
  Graph g(n_nodes, std::move(labels));
  for (auto [i, j] : edges) {
    if (g.has_edge(i, j)) {
      ++out.duplicates_dropped;
      continue;
    }
    g.add_edge(i, j);
  }
  out.graph = std::move(g);
  return out;
}

LoadedGraph load_edge_list_file(const std::string& path, EdgeListFormat format) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open edge list file: " + path);
  return load_edge_list(in, format);
}

void write_edge_list(const Graph& g, std::ostream& out) {
  out << "# n=" << g.num_nodes() << "\n";
  for (int i = 0; i < g.num_nodes(); ++i)
    for (int32_t j : g.neighbors(i))
      if (j > i) out << i << " " << j << "\n";
}

std::string edge_list_string(const Graph& g) {
  std::ostringstream ss;
  write_edge_list(g, ss);
  return ss.str();
}

PartitionedGraph partition_graph(const Graph& g, int n_release, uint64_t seed) {
  const int N = g.num_nodes();
  if (n_release < 1 || n_release >= N)
    throw std::invalid_argument("partition: release size must be in [1, N-1]");
  std::vector<int32_t> idx(N);
  for (int i = 0; i < N; ++i) idx[i] = i;
  Rng rng(seed);
  for (int i = N - 1; i > 0; --i) {
    int j = int(rng.uniform_int(0, i));
    std::swap(idx[i], idx[j]);
  }
  PartitionedGraph p;
  p.release_ids.assign(idx.begin(), idx.begin() + n_release);
  p.holdout_ids.assign(idx.begin() + n_release, idx.end());
  std::sort(p.release_ids.begin(), p.release_ids.end());
  std::sort(p.holdout_ids.begin(), p.holdout_ids.end());

  const int n = n_release, m = N - n_release;
  std::vector<int32_t> where(N, -1);  // position within its block
  std::vector<uint8_t> is_rel(N, 0);
  for (int i = 0; i < n; ++i) {
    where[p.release_ids[i]] = i;
    is_rel[p.release_ids[i]] = 1;
  }
  for (int j = 0; j < m; ++j) where[p.holdout_ids[j]] = j;

  p.a11 = Graph(n);
  p.a22 = Graph(m);
  p.a12 = BitMatrix(n, m);
  for (int u = 0; u < N; ++u) {
    for (int32_t v : g.neighbors(u)) {
      if (v < u) continue;
      if (is_rel[u] && is_rel[v])
        p.a11.add_edge(where[u], where[v]);
      else if (!is_rel[u] && !is_rel[v])
        p.a22.add_edge(where[u], where[v]);
      else if (is_rel[u])
        p.a12.set(where[u], where[v]);
      else
        p.a12.set(where[v], where[u]);
    }
  }
  p.labels = g.labels();
  return p;
}

Graph reassemble(const PartitionedGraph& p) {
  const int n = int(p.release_ids.size()), m = int(p.holdout_ids.size());
  Graph g(n + m, p.labels);
  for (int i = 0; i < n; ++i)
    for (int32_t j : p.a11.neighbors(i))
      if (j > i) g.add_edge(p.release_ids[i], p.release_ids[j]);
  for (int i = 0; i < m; ++i)
    for (int32_t j : p.a22.neighbors(i))
      if (j > i) g.add_edge(p.holdout_ids[i], p.holdout_ids[j]);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j)
      if (p.a12.get(i, j)) g.add_edge(p.release_ids[i], p.holdout_ids[j]);
  return g;
}

}  // namespace grand
