#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "blocksel/blockmodels.hpp"
#include "blocksel/graph.hpp"
#include "blocksel/spectral.hpp"

namespace blocksel {

/// Result of minimizing one of the clustering objectives.
struct ClusterSolution {
    Labels labels;
    double objective = 0.0;
    std::vector<Vector> centroids;  // Q1: one per cluster
    std::vector<Matrix> bases;      // Q2/Q3: d x r_k orthonormal columns, Pi_k = V_k V_k^T
    int n_iters = 0;                // rounds used by the winning restart
    int n_restarts_used = 0;
    int best_restart = 0;
    bool converged = true;          // false if the winning restart hit the round cap
    bool degenerate = false;        // an empty cluster or a cluster smaller than the rank
};

/// Progress report for one round of a restart: objective after the round and
/// whether an empty cluster was repaired on the way in.
struct RoundInfo {
    int restart = 0;
    int round = 0;
    double objective = 0.0;
    bool repaired = false;
};

using RoundObserver = std::function<void(const RoundInfo&)>;

constexpr int kDefaultQ1Restarts = 10;
constexpr int kDefaultSubspaceRestarts = 20;
constexpr int kMaxRounds = 100;

/// sum_k sum_{i in k} ||u_i - mean_k||^2. Empty clusters contribute 0.
double q1_value(const Labels& labels, const Matrix& points);

/// sum_k ||M_k||_F^2 - ||V_k^T M_k||_F^2 where V_k spans the top min(r, n_k, d)
/// left singular vectors of the d x n_k matrix of cluster k's points.
/// r = 1 gives Q2, r = K gives Q3.
double q_subspace_value(const Labels& labels, const Matrix& points, int r);

/// Lloyd iterations from k-means++ seeds, best of n_restarts.
/// Throws std::invalid_argument if K > n or K < 1.
ClusterSolution minimize_q1(const Matrix& points, int K, int n_restarts, std::uint64_t seed,
                            const RoundObserver& observer = {});

struct SubspaceInit {
    std::optional<Labels> labels;  // start from these labels (single start) instead of random

    static SubspaceInit random() { return {}; }
    static SubspaceInit from_labels(Labels l) { return {std::move(l)}; }
};

/// Alternates rank-r projection fits and nearest-subspace reassignment.
ClusterSolution minimize_q_subspace(const Matrix& points, int K, int r, int n_restarts, std::uint64_t seed,
                                    const SubspaceInit& init = {}, const RoundObserver& observer = {});

/// K-means on the Laplacian embedding.
ClusterSolution sc_l(const Graph& g, int K, int n_restarts = kDefaultQ1Restarts, std::uint64_t seed = 0);

/// K-means on the row-normalized Laplacian embedding.
ClusterSolution rsc_l(const Graph& g, int K, int n_restarts = kDefaultQ1Restarts, std::uint64_t seed = 0);

/// Orthogonal subspace clustering: K-means on the top-K eigenvectors of the
/// affinity |U U^T| built from the K^2-dimensional adjacency embedding.
ClusterSolution osc(const Graph& g, int K, int n_restarts = kDefaultQ1Restarts, std::uint64_t seed = 0);

/// min over bijections sigma of (1/n) #{i : est_i != sigma(true_i)}.
/// Exact enumeration for K <= 8, Hungarian assignment otherwise.
double mislabel_rate(const Labels& est, const Labels& truth, int K);

/// Maximum-weight perfect matching on a square matrix; returns col[row].
std::vector<int> hungarian_max(const Matrix& weight);

/// "node,label" CSV using ids when given.
void write_labels_csv(std::ostream& out, const Labels& labels, std::span<const std::string> ids = {});

}  // namespace blocksel
