#pragma once

#include "dcnn/graph.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace dcnn {

enum class TaskKind { node, graph, edge };

std::string task_name(TaskKind task);

/// A loaded dataset: one graph with per-node labels for node tasks, many
/// graphs with per-graph labels for graph tasks. Feature width is uniform
/// across graphs; labels lie in [0, num_classes).
struct DatasetBundle {
    std::vector<Graph> graphs;
    TaskKind task = TaskKind::node;
    int num_classes = 0;
    std::string name;
    std::vector<std::string> class_names;  // dense class index -> source label
    std::vector<int> graph_labels;         // graph tasks only, one per graph
};

/// Throws if the bundle violates its invariants (uniform feature width,
/// labels in range, graph-label count).
void validate_bundle(const DatasetBundle& bundle);

struct CitationLoadStats {
    long edges_read = 0;
    long edges_skipped = 0;  // lines whose endpoints are not in the content file
    std::uint64_t content_checksum = 0;
    std::uint64_t cites_checksum = 0;
};

/// Citation-network format. Content file: one node per line, whitespace
/// separated: id, F feature values, label string. Cites file: one edge per
/// line: cited_id citing_id. The network is treated as undirected. Edges
/// touching unknown ids are skipped and counted in `stats`; malformed lines
/// throw with the offending line number.
DatasetBundle load_citation_dataset(const std::string& content_path,
                                    const std::string& cites_path,
                                    CitationLoadStats* stats = nullptr);

/// Inverse of load_citation_dataset, using node indices as ids. Weights must
/// be integral (the format has no weight column); a weight-w edge is written
/// as w duplicate lines.
void save_citation_dataset(const DatasetBundle& bundle, const std::string& content_path,
                           const std::string& cites_path);

/// Multi-file graph-classification layout under `directory`, named after its
/// basename: <name>_A.txt (comma-separated 1-based global edge pairs),
/// <name>_graph_indicator.txt, <name>_graph_labels.txt, and optionally
/// <name>_node_labels.txt / <name>_node_attributes.txt. Node features come
/// from attributes when present, else one-hot node labels, else a single
/// bias column of ones.
DatasetBundle load_tu_dataset(const std::string& directory);

/// Inverse of load_tu_dataset. Features are always written as attributes, so
/// a round trip reproduces feature values regardless of their origin.
void save_tu_dataset(const DatasetBundle& bundle, const std::string& directory);

enum class SplitProtocol { thirds, learning_curve };

struct SplitSpec {
    std::vector<int> train;
    std::vector<int> validation;
    std::vector<int> test;
    std::uint64_t seed = 0;
};

/// Random disjoint splits of [0, population). `thirds` covers everything
/// with equal sizes (+-1). `learning_curve` holds out 10% validation and 10%
/// test, then takes floor(fraction * remainder) training entities (at least
/// one); the rest of the population is unused. Deterministic per seed.
SplitSpec make_splits(int population, SplitProtocol protocol, std::uint64_t seed,
                      double fraction = 1.0);

enum class SyntheticKind { path, two_cliques, random_gnp };

/// Deterministic fixture graphs, all featureless (F = 0).
///   path:        nodes 0-1-...-(N-1) in a line.
///   two_cliques: a ceil(N/2)-clique and a floor(N/2)-clique joined by one
///                bridge edge, node labels 0/1 by clique.
///   random_gnp:  G(N, p) with p = edge_probability, sampled by geometric
///                skipping so sparse graphs cost O(E) draws.
Graph generate_synthetic(SyntheticKind kind, int num_nodes, std::uint64_t seed = 0,
                         double edge_probability = 0.5);

/// JSON manifest text: counts, class map, and an FNV-1a checksum over the
/// bundle's full content (structure, features, labels).
std::string dataset_manifest(const DatasetBundle& bundle);

}  // namespace dcnn
