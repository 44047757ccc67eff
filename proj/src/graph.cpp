#include "dcnn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>

namespace dcnn {

namespace {

// Collapses duplicate (source, target) pairs by summing weights. The first
// occurrence keeps its slot so list order survives.
std::vector<Edge> collapse_duplicates(std::vector<Edge> edges) {
    std::map<std::pair<int, int>, std::size_t> seen;
    std::vector<Edge> out;
    out.reserve(edges.size());
    for (const Edge& e : edges) {
        auto key = std::make_pair(e.source, e.target);
        auto it = seen.find(key);
        if (it == seen.end()) {
            seen.emplace(key, out.size());
            out.push_back(e);
        } else {
            out[it->second].weight += e.weight;
        }
    }
    return out;
}

}  // namespace

Graph::Graph(int num_nodes, std::vector<Edge> edges, Matrix features, bool directed,
             std::optional<IntVector> labels)
    : num_nodes_(num_nodes), directed_(directed) {
    if (num_nodes < 0) throw std::invalid_argument("Graph: negative node count");
    for (const Edge& e : edges) {
        if (e.source < 0 || e.source >= num_nodes || e.target < 0 || e.target >= num_nodes)
            throw std::invalid_argument("Graph: edge endpoint out of range");
        if (e.weight < 0.0 || !std::isfinite(e.weight))
            throw std::invalid_argument("Graph: edge weight must be finite and nonnegative");
    }
    if (features.size() == 0) {
        features_ = Matrix(num_nodes, features.cols());
    } else {
        if (features.rows() != num_nodes)
            throw std::invalid_argument("Graph: feature row count must equal node count");
        features_ = std::move(features);
    }
    if (labels) {
        if (labels->size() != num_nodes)
            throw std::invalid_argument("Graph: label count must equal node count");
        labels_ = std::move(labels);
    }

    if (!directed_) {
        std::vector<Edge> symmetric;
        symmetric.reserve(edges.size() * 2);
        for (const Edge& e : edges) {
            symmetric.push_back(e);
            if (e.source != e.target) symmetric.push_back({e.target, e.source, e.weight});
        }
        edges_ = collapse_duplicates(std::move(symmetric));
    } else {
        edges_ = collapse_duplicates(std::move(edges));
    }
}

Graph::Graph(normalized_tag, int num_nodes, std::vector<Edge> edges, Matrix features,
             bool directed, std::optional<IntVector> labels)
    : num_nodes_(num_nodes),
      edges_(std::move(edges)),
      features_(std::move(features)),
      directed_(directed),
      labels_(std::move(labels)) {}

const IntVector& Graph::labels() const {
    if (!labels_) throw std::logic_error("Graph: no labels attached");
    return *labels_;
}

std::vector<Edge> Graph::canonical_edges() const {
    std::vector<Edge> out;
    if (directed_) {
        for (const Edge& e : edges_)
            if (e.source != e.target) out.push_back(e);
        return out;
    }
    // Undirected: one entry per pair, ordered by whichever representative
    // appeared first in the list.
    std::map<std::pair<int, int>, bool> emitted;
    for (const Edge& e : edges_) {
        if (e.source == e.target) continue;
        auto [lo, hi] = std::minmax(e.source, e.target);
        if (emitted.contains({lo, hi})) continue;
        emitted.emplace(std::make_pair(lo, hi), true);
        out.push_back({lo, hi, e.weight});
    }
    return out;
}

Matrix Graph::dense_adjacency() const {
    Matrix a = Matrix::Zero(num_nodes_, num_nodes_);
    for (const Edge& e : edges_) a(e.source, e.target) += e.weight;
    return a;
}

double TransitionMatrix::row_sum(int i) const {
    double s = 0.0;
    for (const Entry& e : entries_[i]) s += e.value;
    return s;
}

Matrix TransitionMatrix::apply(const Matrix& x) const {
    if (x.rows() != rows_)
        throw std::invalid_argument("TransitionMatrix::apply: row count mismatch");
    Matrix out = Matrix::Zero(rows_, x.cols());
    for (int i = 0; i < rows_; ++i) {
        auto dst = out.row(i);
        for (const Entry& e : entries_[i]) dst += e.value * x.row(e.column);
    }
    return out;
}

Matrix TransitionMatrix::dense() const {
    Matrix p = Matrix::Zero(rows_, rows_);
    for (int i = 0; i < rows_; ++i)
        for (const Entry& e : entries_[i]) p(i, e.column) += e.value;
    return p;
}

Matrix DiffusedFeatures::entity(int i) const {
    Matrix rep(num_hops + 1, num_features);
    for (int j = 0; j <= num_hops; ++j) rep.row(j) = slices[j].row(i);
    return rep;
}

Matrix IncidenceMatrix::dense() const {
    Matrix b = Matrix::Zero(num_edges, num_nodes);
    for (int m = 0; m < num_edges; ++m) {
        b(m, endpoints[m][0]) = 1.0;
        b(m, endpoints[m][1]) = 1.0;
    }
    return b;
}

TransitionMatrix build_transition(const Graph& graph) {
    const int n = graph.num_nodes();
    // Bucket edges by source, preserving list order within each row.
    std::vector<std::vector<std::pair<int, double>>> rows(n);
    for (const Edge& e : graph.edges()) rows[e.source].emplace_back(e.target, e.weight);

    TransitionMatrix p(n);
    for (int i = 0; i < n; ++i) {
        double degree = 0.0;
        for (const auto& [col, w] : rows[i]) degree += w;
        if (degree <= 0.0) continue;  // isolated node: all-zero row
        for (const auto& [col, w] : rows[i]) p.push_entry(i, col, w / degree);
    }
    return p;
}

DiffusedFeatures diffuse_features(const TransitionMatrix& transition, const Matrix& features,
                                  int hops) {
    if (hops < 0) throw std::invalid_argument("diffuse_features: negative hop count");
    if (features.rows() != transition.rows())
        throw std::invalid_argument("diffuse_features: feature rows must match transition rows");

    DiffusedFeatures d;
    d.num_nodes = transition.rows();
    d.num_hops = hops;
    d.num_features = static_cast<int>(features.cols());
    d.slices.reserve(hops + 1);
    d.slices.push_back(features);
    for (int j = 1; j <= hops; ++j) d.slices.push_back(transition.apply(d.slices.back()));
    return d;
}

DiffusedFeatures diffuse_features(const Graph& graph, int hops) {
    return diffuse_features(build_transition(graph), graph.features(), hops);
}

IncidenceMatrix incidence_matrix(const Graph& graph) {
    IncidenceMatrix b;
    b.num_nodes = graph.num_nodes();
    for (const Edge& e : graph.canonical_edges()) b.endpoints.push_back({e.source, e.target});
    b.num_edges = static_cast<int>(b.endpoints.size());
    return b;
}

Graph augment_with_edges(const Graph& graph, const std::optional<Matrix>& edge_features) {
    const int n = graph.num_nodes();
    const int f = graph.num_features();
    const std::vector<Edge> canonical = graph.canonical_edges();
    const int m = static_cast<int>(canonical.size());

    if (edge_features) {
        if (edge_features->rows() != m)
            throw std::invalid_argument("augment_with_edges: edge feature row count != edge count");
        if (edge_features->cols() != f)
            throw std::invalid_argument("augment_with_edges: edge feature width != node feature width");
    }

    std::vector<Edge> edges;
    edges.reserve(graph.edges().size() + 2 * canonical.size());
    if (graph.directed()) {
        edges = graph.edges();
        for (int k = 0; k < m; ++k) {
            // Incidence blocks are symmetric even in the directed case.
            edges.push_back({canonical[k].source, n + k, 1.0});
            edges.push_back({n + k, canonical[k].source, 1.0});
            edges.push_back({canonical[k].target, n + k, 1.0});
            edges.push_back({n + k, canonical[k].target, 1.0});
        }
    } else {
        for (const Edge& e : graph.edges()) {
            if (e.source <= e.target) edges.push_back(e);  // constructor re-mirrors
        }
        for (int k = 0; k < m; ++k) {
            edges.push_back({canonical[k].source, n + k, 1.0});
            edges.push_back({canonical[k].target, n + k, 1.0});
        }
    }

    Matrix features(n + m, f);
    features.topRows(n) = graph.features();
    if (edge_features)
        features.bottomRows(m) = *edge_features;
    else
        features.bottomRows(m).setOnes();

    std::optional<IntVector> labels;
    if (graph.has_labels()) {
        IntVector y = IntVector::Constant(n + m, -1);
        y.head(n) = graph.labels();
        labels = std::move(y);
    }

    return Graph(n + m, std::move(edges), std::move(features), graph.directed(), std::move(labels));
}

Graph add_bias_feature(const Graph& graph) {
    const int n = graph.num_nodes();
    Matrix features(n, graph.num_features() + 1);
    features.col(0).setOnes();
    if (graph.num_features() > 0) features.rightCols(graph.num_features()) = graph.features();

    std::optional<IntVector> labels;
    if (graph.has_labels()) labels = graph.labels();
    // Edge list is already normalized; bypass re-symmetrization.
    return Graph(Graph::normalized_tag{}, n, graph.edges(), std::move(features),
                 graph.directed(), std::move(labels));
}

Graph permute_graph(const Graph& graph, std::span<const int> perm) {
    const int n = graph.num_nodes();
    if (static_cast<int>(perm.size()) != n)
        throw std::invalid_argument("permute_graph: permutation size != node count");
    std::vector<int> inverse(n, -1);
    for (int i = 0; i < n; ++i) {
        int v = perm[i];
        if (v < 0 || v >= n || inverse[v] != -1)
            throw std::invalid_argument("permute_graph: not a bijection on [0, N)");
        inverse[v] = i;
    }

    std::vector<Edge> edges;
    edges.reserve(graph.edges().size());
    for (const Edge& e : graph.edges())
        edges.push_back({inverse[e.source], inverse[e.target], e.weight});

    Matrix features(n, graph.num_features());
    for (int i = 0; i < n; ++i) features.row(i) = graph.features().row(perm[i]);

    std::optional<IntVector> labels;
    if (graph.has_labels()) {
        IntVector y(n);
        for (int i = 0; i < n; ++i) y[i] = graph.labels()[perm[i]];
        labels = std::move(y);
    }

    // The edge list is already normalized; rebuilding through the public
    // constructor would re-collapse and could reorder rows.
    return Graph(Graph::normalized_tag{}, n, std::move(edges), std::move(features),
                 graph.directed(), std::move(labels));
}

}  // namespace dcnn
