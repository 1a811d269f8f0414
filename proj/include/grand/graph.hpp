#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace grand {

// Packed 0/1 matrix, row-major.
class BitMatrix {
 public:
  BitMatrix() = default;
  BitMatrix(int rows, int cols);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool get(int i, int j) const {
    return (bits_[size_t(i) * words_ + (j >> 6)] >> (j & 63)) & 1ULL;
  }
  void set(int i, int j, bool v = true);
  // Row as one byte per column, 0 or 1.
  std::vector<uint8_t> row_bytes(int i) const;
  int64_t row_sum(int i) const;
  bool row_equal(const BitMatrix& other, int i) const;

 private:
  int rows_ = 0, cols_ = 0, words_ = 0;
  std::vector<uint64_t> bits_;
};

// Simple undirected graph: symmetric adjacency, zero diagonal, 0/1 entries.
// Dense packed-bit rows up to kDenseNodeLimit nodes, sorted neighbor lists
// beyond that. Both edge queries and neighbor lists work in either mode.
class Graph {
 public:
  static constexpr int kDenseNodeLimit = 20000;

  Graph() = default;
  explicit Graph(int n, std::vector<std::string> labels = {});

  int num_nodes() const { return n_; }
  int64_t num_edges() const { return edges_; }
  bool is_dense() const { return dense_; }

  bool has_edge(int i, int j) const;
  void add_edge(int i, int j);  // no-op on duplicates; throws on self-loop or bad index
  int degree(int i) const { return deg_[i]; }
  std::vector<int32_t> neighbors(int i) const;

  // Dense mode only: packed row words for fast set intersection.
  const uint64_t* row_words(int i) const { return bits_.data() + size_t(i) * words_; }
  int words_per_row() const { return words_; }

  double density() const;

  bool has_labels() const { return !labels_.empty(); }
  const std::vector<std::string>& labels() const { return labels_; }
  std::string label(int i) const;

  bool operator==(const Graph& other) const;

 private:
  int n_ = 0;
  bool dense_ = true;
  int words_ = 0;
  int64_t edges_ = 0;
  std::vector<uint64_t> bits_;             // dense mode
  std::vector<std::vector<int32_t>> adj_;  // sparse mode, each sorted ascending
  std::vector<int32_t> deg_;
  std::vector<std::string> labels_;
};

enum class EdgeListFormat { Whitespace, Csv };

struct LoadedGraph {
  Graph graph;
  int64_t self_loops_dropped = 0;
  int64_t duplicates_dropped = 0;
};

// Whitespace format: "<src> <dst>" per line, "#" comment lines skipped. A
// "# n=<N>" comment fixes the node count; labels must then be integers in
// [0, N). Without it, labels are arbitrary tokens mapped to dense ids in
// first-appearance order. CSV format: header "src,dst" then "<src>,<dst>".
LoadedGraph load_edge_list(std::istream& in, EdgeListFormat format);
LoadedGraph load_edge_list_file(const std::string& path, EdgeListFormat format);

// Canonical form: "# n=<N>" header, one "i j" line per edge with i < j,
// sorted ascending. load_edge_list(write_edge_list(g)) reproduces g.
void write_edge_list(const Graph& g, std::ostream& out);
std::string edge_list_string(const Graph& g);

struct PartitionedGraph {
  std::vector<int32_t> release_ids;  // ascending original indices, length n
  std::vector<int32_t> holdout_ids;  // ascending original indices, length m
  Graph a11;                         // release-release block
  BitMatrix a12;                     // n x m release-holdout block
  Graph a22;                         // holdout-holdout block
  std::vector<std::string> labels;   // original labels, empty if none
};

// Uniformly random release subset of the given size, deterministic in seed.
// Blocks reassemble losslessly; isolated nodes are kept in their block.
PartitionedGraph partition_graph(const Graph& g, int n_release, uint64_t seed);
Graph reassemble(const PartitionedGraph& p);

}  // namespace grand
