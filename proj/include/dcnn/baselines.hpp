#pragma once

#include "dcnn/graph.hpp"

#include <span>
#include <utility>
#include <vector>

namespace dcnn {

/// exp(M) by scaling-and-squaring with a truncated Taylor series. The input
/// is halved until its inf-norm is at most 1/2, so the series converges well
/// inside double precision. Throws on non-square or non-finite input.
Matrix matrix_exponential(const Matrix& m);

enum class KernelKind { exponential_diffusion, laplacian_exponential_diffusion };

/// Dense similarity matrix over nodes. Symmetric positive-definite for
/// symmetric adjacency input.
struct KernelMatrix {
    Matrix values;  // N x N
    KernelKind kind = KernelKind::exponential_diffusion;
    double alpha = 0.0;
};

/// K = exp(alpha * A). Requires a symmetric adjacency and alpha >= 0.
KernelMatrix exponential_diffusion_kernel(const Matrix& adjacency, double alpha);
KernelMatrix exponential_diffusion_kernel(const Graph& graph, double alpha);

/// K = exp(-alpha * L) with L = D - A, D the diagonal of weighted degrees.
/// Row sums of K are 1 because L annihilates the constant vector.
KernelMatrix laplacian_diffusion_kernel(const Matrix& adjacency, double alpha);
KernelMatrix laplacian_diffusion_kernel(const Graph& graph, double alpha);

/// Similarity-weighted vote: query q gets argmax_c sum of K[q][t] over
/// training nodes t with label c; ties break to the lowest class index.
/// Labels are indexed by node id. Throws on an empty training set.
std::vector<int> kernel_classify(const KernelMatrix& kernel, const IntVector& labels,
                                 std::span<const int> train_indices,
                                 std::span<const int> query_indices, int num_classes);

enum class Penalty { l1, l2 };

struct LogisticConfig {
    int max_iterations = 2000;
    double tolerance = 1e-9;  // relative objective change at which to stop
};

/// Multinomial logistic regression on raw feature rows. The bias is never
/// penalized.
struct LogisticModel {
    Matrix weights;  // C x F
    Vector bias;     // C
    Penalty penalty = Penalty::l2;
    double lambda = 0.0;
};

/// Smooth part of the objective: mean cross-entropy of softmax(X W^T + b),
/// plus lambda * ||W||^2 when the penalty is l2. The l1 term is handled by
/// the proximal step, not here.
double logistic_smooth_objective(const LogisticModel& model, const Matrix& features,
                                 std::span<const int> labels);

/// Gradient of logistic_smooth_objective in (weights, bias).
std::pair<Matrix, Vector> logistic_smooth_gradient(const LogisticModel& model,
                                                   const Matrix& features,
                                                   std::span<const int> labels);

/// Full-batch gradient descent from zero weights with a step size from a
/// power-iteration Lipschitz bound; l1 uses proximal soft-thresholding.
/// Deterministic. Throws on invalid arguments or a non-finite objective.
LogisticModel logistic_train(const Matrix& features, std::span<const int> labels,
                             int num_classes, Penalty penalty, double lambda,
                             const LogisticConfig& config = {});

Matrix logistic_scores(const LogisticModel& model, const Matrix& features);
std::vector<int> logistic_predict(const LogisticModel& model, const Matrix& features);

}  // namespace dcnn
