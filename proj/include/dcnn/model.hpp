#pragma once

#include "dcnn/graph.hpp"

#include <filesystem>
#include <vector>

namespace dcnn {

/// How the dense-layer output feeds the loss. The default keeps the scores
/// linear; Tanh bounds them in (-1, 1).
enum class OutputNonlinearity { none, tanh };

/// Learned state of a diffusion-convolutional classifier.
///
/// conv_weights ties one weight to each (hop, feature) pair; dense_weights
/// maps the flattened (H+1) x F activation of an entity to C class scores.
/// Flattening is row-major: activation (hop j, feature k) lands in dense
/// column j * F + k. There are no bias terms; add a bias feature to the
/// graph instead.
struct DcnnParams {
    int hops = 0;
    int num_features = 0;
    int num_classes = 0;
    Matrix conv_weights;   // (H+1) x F
    Matrix dense_weights;  // C x ((H+1) * F)

    long parameter_count() const { return conv_weights.size() + dense_weights.size(); }
};

/// Post-tanh activations, one (H+1) x F block per entity. Stored hop-major
/// exactly like DiffusedFeatures: slices[j] is N x F.
struct NodeActivations {
    int num_entities = 0;
    int num_hops = 0;
    int num_features = 0;
    std::vector<Matrix> slices;
};

/// Pre-softmax class scores, one row per entity.
using ClassScores = Matrix;

struct Gradients {
    Matrix conv_weights;
    Matrix dense_weights;
};

/// Z[i][j][k] = tanh(Wc[j][k] * diffused[i][j][k]).
NodeActivations node_activations(const DiffusedFeatures& diffused, const DcnnParams& params);

/// Averages the power series over nodes before the nonlinearity, collapsing
/// the graph to a single entity.
DiffusedFeatures mean_entity(const DiffusedFeatures& diffused);

/// Whole-graph activations: tanh(Wc ⊙ mean over nodes of P^j X).
NodeActivations graph_activations(const DiffusedFeatures& diffused, const DcnnParams& params);

/// score[i][c] = sum_{j,k} Wd[c][(j,k)] * Z[i][j][k], optionally squashed.
ClassScores class_scores(const NodeActivations& activations, const DcnnParams& params,
                         OutputNonlinearity output = OutputNonlinearity::none);

/// Per-row argmax; ties break toward the lowest class index.
std::vector<int> predict_hard(const ClassScores& scores);

/// Row-wise softmax with max subtraction.
Matrix predict_proba(const ClassScores& scores);

/// Forward pass with everything backward needs.
struct Forward {
    NodeActivations activations;
    ClassScores scores;
};

Forward forward(const DiffusedFeatures& diffused, const DcnnParams& params,
                OutputNonlinearity output = OutputNonlinearity::none);

/// Exact gradients of the composed map scores(activations(diffused)) given
/// upstream = dLoss/dScores, chained through tanh via 1 - Z^2.
Gradients backward(const DiffusedFeatures& diffused, const DcnnParams& params,
                   const Forward& cache, const Matrix& upstream,
                   OutputNonlinearity output = OutputNonlinearity::none);

/// Convenience overload that recomputes the forward pass.
Gradients backward(const DiffusedFeatures& diffused, const DcnnParams& params,
                   const Matrix& upstream,
                   OutputNonlinearity output = OutputNonlinearity::none);

/// Row-gather of entity representations, preserving index order.
DiffusedFeatures gather(const DiffusedFeatures& diffused, std::span<const int> indices);

/// Text checkpoint: magic/version line, "H F C" line, then W^c and W^d
/// row-major with round-trip-exact decimals.
void save_checkpoint(const DcnnParams& params, const std::filesystem::path& path);
DcnnParams load_checkpoint(const std::filesystem::path& path);

}  // namespace dcnn
