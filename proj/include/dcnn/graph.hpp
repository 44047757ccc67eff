#pragma once

#include <Eigen/Dense>

#include <array>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace dcnn {

// Row-major so that per-node feature rows are contiguous; every hot loop in
// this codebase walks rows.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using IntVector = Eigen::VectorXi;

/// One weighted edge. Weights must be nonnegative (random-walk semantics).
struct Edge {
    int source = 0;
    int target = 0;
    double weight = 1.0;
};

/// A graph with a dense node-feature matrix and optional per-node class
/// labels (-1 marks an unlabeled node).
///
/// Undirected graphs are symmetrized on construction: each input edge
/// (s, t, w) also contributes (t, s, w) (self-loops are stored once), and
/// duplicate (s, t) pairs collapse with summed weights. Apart from that the
/// edge list keeps its insertion order, which fixes the accumulation order
/// of every downstream sparse product.
class Graph {
public:
    Graph(int num_nodes, std::vector<Edge> edges, Matrix features,
          bool directed = false, std::optional<IntVector> labels = std::nullopt);

    int num_nodes() const { return num_nodes_; }
    int num_features() const { return static_cast<int>(features_.cols()); }
    bool directed() const { return directed_; }

    const std::vector<Edge>& edges() const { return edges_; }
    const Matrix& features() const { return features_; }
    bool has_labels() const { return labels_.has_value(); }
    const IntVector& labels() const;

    /// Edges counted once per undirected pair, in first-appearance order.
    /// Self-loops are excluded; this is the edge list M_t that incidence
    /// construction and edge augmentation operate on.
    std::vector<Edge> canonical_edges() const;

    /// Dense adjacency (test/oracle helper; avoid on large graphs).
    Matrix dense_adjacency() const;

private:
    struct normalized_tag {};
    Graph(normalized_tag, int num_nodes, std::vector<Edge> edges, Matrix features,
          bool directed, std::optional<IntVector> labels);

    friend Graph permute_graph(const Graph&, std::span<const int>);
    friend Graph add_bias_feature(const Graph&);

    int num_nodes_;
    std::vector<Edge> edges_;
    Matrix features_;
    bool directed_;
    std::optional<IntVector> labels_;
};

/// Row-stochastic transition matrix. Each row holds its nonzero entries in
/// edge-insertion order; rows of isolated nodes are empty (all-zero).
class TransitionMatrix {
public:
    struct Entry {
        int column;
        double value;
    };

    explicit TransitionMatrix(int rows) : rows_(rows), entries_(rows) {}

    int rows() const { return rows_; }
    std::span<const Entry> row(int i) const { return entries_[i]; }
    double row_sum(int i) const;

    /// P * x with a fixed per-row accumulation order.
    Matrix apply(const Matrix& x) const;

    Matrix dense() const;

    void push_entry(int row, int column, double value) { entries_[row].push_back({column, value}); }

private:
    int rows_;
    std::vector<std::vector<Entry>> entries_;
};

/// Power-series-diffused features: slice j holds P^j X, j in [0, hops].
struct DiffusedFeatures {
    int num_nodes = 0;
    int num_hops = 0;   // max hop H; there are H+1 slices
    int num_features = 0;
    std::vector<Matrix> slices;

    const Matrix& slice(int hop) const { return slices[hop]; }

    /// The (H+1) x F representation of one entity.
    Matrix entity(int i) const;
};

/// Edge-by-node incidence: row m marks the two endpoints of canonical edge m.
/// Stored as endpoint pairs; logically an M x N binary matrix.
struct IncidenceMatrix {
    int num_edges = 0;
    int num_nodes = 0;
    std::vector<std::array<int, 2>> endpoints;

    Matrix dense() const;
};

/// P[i][j] = A[i][j] / degree(i); zero-degree rows stay all-zero.
TransitionMatrix build_transition(const Graph& graph);

/// Stacks {X, PX, ..., P^H X} without ever materializing P^j.
DiffusedFeatures diffuse_features(const TransitionMatrix& transition, const Matrix& features, int hops);

DiffusedFeatures diffuse_features(const Graph& graph, int hops);

IncidenceMatrix incidence_matrix(const Graph& graph);

/// Lifts each canonical edge to a node adjacent to both endpoints:
/// A' = [[A, B^T], [B, 0]]. Edge-node features come from `edge_features`
/// (M x F) or default to 1.0 in every column. Edge nodes are unlabeled (-1)
/// when the input graph carries labels.
Graph augment_with_edges(const Graph& graph, const std::optional<Matrix>& edge_features = std::nullopt);

/// Prepends a column of ones. A featureless graph ends up with F = 1.
Graph add_bias_feature(const Graph& graph);

/// Relabels nodes so that node i of the result equals node perm[i] of the
/// input. Throws if perm is not a bijection on [0, N).
Graph permute_graph(const Graph& graph, std::span<const int> perm);

}  // namespace dcnn
