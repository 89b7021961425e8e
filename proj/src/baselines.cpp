#include <algorithm>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "cluster_internal.hpp"

namespace blocksel {

ClusterSolution sc_l(const Graph& g, int K, int n_restarts, std::uint64_t seed) {
    auto emb = laplacian_embedding(g, K, false);
    return minimize_q1(emb.rows, K, n_restarts, seed);
}

ClusterSolution rsc_l(const Graph& g, int K, int n_restarts, std::uint64_t seed) {
    auto emb = laplacian_embedding(g, K, true);
    return minimize_q1(emb.rows, K, n_restarts, seed);
}

ClusterSolution osc(const Graph& g, int K, int n_restarts, std::uint64_t seed) {
    if (static_cast<std::size_t>(K) * static_cast<std::size_t>(K) > g.num_nodes())
        throw std::invalid_argument("OSC needs K^2 <= n");
    auto emb = ase(g, static_cast<Eigen::Index>(K) * K);
    // Population rows from different communities are orthogonal, so |U U^T|
    // is block diagonal up to noise.
    Matrix affinity = (emb.rows * emb.rows.transpose()).cwiseAbs();
    affinity.diagonal().setZero();
    auto pairs = top_eigenpairs(affinity, K);
    return minimize_q1(pairs.vectors, K, n_restarts, seed);
}

double mislabel_rate(const Labels& est, const Labels& truth, int K) {
    if (est.size() != truth.size()) throw std::invalid_argument("label vectors differ in length");
    if (K < 1) throw std::invalid_argument("K must be positive");
    if (est.empty()) return 0.0;
    Matrix confusion = Matrix::Zero(K, K);
    for (std::size_t i = 0; i < est.size(); ++i) {
        if (est[i] < 1 || est[i] > K || truth[i] < 1 || truth[i] > K) throw std::invalid_argument("label out of range [1..K]");
        confusion(est[i] - 1, truth[i] - 1) += 1.0;
    }

    double matched = 0.0;
    if (K <= 8) {
        std::vector<int> perm(static_cast<std::size_t>(K));
        std::iota(perm.begin(), perm.end(), 0);
        do {
            double m = 0.0;
            for (int t = 0; t < K; ++t) m += confusion(perm[static_cast<std::size_t>(t)], t);
            matched = std::max(matched, m);
        } while (std::next_permutation(perm.begin(), perm.end()));
    } else {
        auto col = hungarian_max(confusion);
        for (int e = 0; e < K; ++e) matched += confusion(e, col[static_cast<std::size_t>(e)]);
    }
    return 1.0 - matched / static_cast<double>(est.size());
}

std::vector<int> hungarian_max(const Matrix& weight) {
    // Kuhn-Munkres with potentials on cost = max - weight; rows/cols 1-based, 0 is a sentinel.
    if (weight.cols() != weight.rows()) throw std::invalid_argument("hungarian_max needs a square matrix");
    const std::size_t n = static_cast<std::size_t>(weight.rows());
    if (n == 0) return {};
    const double top = weight.maxCoeff();
    const double inf = std::numeric_limits<double>::infinity();
    auto cost = [&](std::size_t i, std::size_t j) {
        return top - weight(static_cast<Eigen::Index>(i - 1), static_cast<Eigen::Index>(j - 1));
    };
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = p[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0, j) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }
    std::vector<int> col(n);
    for (std::size_t j = 1; j <= n; ++j) col[p[j] - 1] = static_cast<int>(j - 1);
    return col;
}

void write_labels_csv(std::ostream& out, const Labels& labels, std::span<const std::string> ids) {
    if (!ids.empty() && ids.size() != labels.size()) throw std::invalid_argument("id table size mismatch");
    out << "node,label\n";
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (ids.empty())
            out << i;
        else
            out << ids[i];
        out << ',' << labels[i] << '\n';
    }
}

}  // namespace blocksel
