#include <algorithm>
#include <limits>
#include <random>

#include "cluster_internal.hpp"

namespace blocksel {

namespace {

struct Restart {
    std::vector<int> assign;  // 0-based
    Matrix centers;           // K x d
    double objective = 0.0;
    int rounds = 0;
    bool converged = false;
    bool repaired = false;
};

Matrix plus_plus_seeds(const Matrix& points, int K, Rng& rng) {
    const Eigen::Index n = points.rows();
    Matrix centers(K, points.cols());
    std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
    centers.row(0) = points.row(pick(rng));
    Vector d2(n);
    for (Eigen::Index i = 0; i < n; ++i) d2[i] = (points.row(i) - centers.row(0)).squaredNorm();
    for (int c = 1; c < K; ++c) {
        const double total = d2.sum();
        Eigen::Index chosen = 0;
        if (total <= 0.0) {
            chosen = pick(rng);
        } else {
            std::uniform_real_distribution<double> u(0.0, total);
            double target = u(rng), acc = 0.0;
            chosen = n - 1;
            for (Eigen::Index i = 0; i < n; ++i) {
                acc += d2[i];
                if (acc > target && d2[i] > 0.0) {
                    chosen = i;
                    break;
                }
            }
        }
        centers.row(c) = points.row(chosen);
        for (Eigen::Index i = 0; i < n; ++i) d2[i] = std::min(d2[i], (points.row(i) - centers.row(c)).squaredNorm());
    }
    return centers;
}

// Single-point moves that Lloyd cannot see: moving x from a to b changes the
// cost by n_b/(n_b+1)|x-c_b|^2 - n_a/(n_a-1)|x-c_a|^2. Every Hartigan optimum
// is also a Lloyd fixed point, so this only ever tightens the result.
void hartigan(const Matrix& points, int K, Restart& st) {
    const Eigen::Index n = points.rows();
    std::vector<double> count(static_cast<std::size_t>(K), 0.0);
    for (int a : st.assign) ++count[static_cast<std::size_t>(a)];
    const double tol = 1e-12 * std::max(1.0, st.objective);
    for (int pass = 0; pass < kMaxRounds; ++pass) {
        bool moved = false;
        for (Eigen::Index i = 0; i < n; ++i) {
            const int a = st.assign[static_cast<std::size_t>(i)];
            const double na = count[static_cast<std::size_t>(a)];
            if (na < 2) continue;
            const double leave = na / (na - 1) * (points.row(i) - st.centers.row(a)).squaredNorm();
            int best = a;
            double best_gain = tol;
            for (int b = 0; b < K; ++b) {
                if (b == a) continue;
                const double nb = count[static_cast<std::size_t>(b)];
                const double gain = leave - nb / (nb + 1) * (points.row(i) - st.centers.row(b)).squaredNorm();
                if (gain > best_gain) {
                    best_gain = gain;
                    best = b;
                }
            }
            if (best == a) continue;
            const double nb = count[static_cast<std::size_t>(best)];
            st.centers.row(a) = (na * st.centers.row(a) - points.row(i)) / (na - 1);
            st.centers.row(best) = (nb * st.centers.row(best) + points.row(i)) / (nb + 1);
            --count[static_cast<std::size_t>(a)];
            ++count[static_cast<std::size_t>(best)];
            st.assign[static_cast<std::size_t>(i)] = best;
            moved = true;
        }
        if (!moved) break;
    }
    // Recompute exactly to shed the drift of the incremental updates.
    st.centers.setZero();
    for (Eigen::Index i = 0; i < n; ++i) st.centers.row(st.assign[static_cast<std::size_t>(i)]) += points.row(i);
    for (int k = 0; k < K; ++k) st.centers.row(k) /= count[static_cast<std::size_t>(k)];
    double obj = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        obj += (points.row(i) - st.centers.row(st.assign[static_cast<std::size_t>(i)])).squaredNorm();
    st.objective = obj;
}

Restart lloyd(const Matrix& points, int K, Rng& rng, int restart, const RoundObserver& observer) {
    const Eigen::Index n = points.rows();
    Restart st;
    st.centers = plus_plus_seeds(points, K, rng);
    st.assign.assign(static_cast<std::size_t>(n), -1);
    std::vector<int> prev;
    Vector dist(n);

    for (int round = 1; round <= kMaxRounds; ++round) {
        for (Eigen::Index i = 0; i < n; ++i) {
            int best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (int k = 0; k < K; ++k) {
                const double dk = (points.row(i) - st.centers.row(k)).squaredNorm();
                if (dk < best_d) {
                    best_d = dk;
                    best = k;
                }
            }
            st.assign[static_cast<std::size_t>(i)] = best;
            dist[i] = best_d;
        }

        std::vector<Eigen::Index> count(static_cast<std::size_t>(K), 0);
        for (int a : st.assign) ++count[static_cast<std::size_t>(a)];
        bool repaired = false;
        for (int k = 0; k < K; ++k) {
            if (count[static_cast<std::size_t>(k)] > 0) continue;
            // Move the worst-fit point from a cluster that can spare it.
            Eigen::Index worst = -1;
            for (Eigen::Index i = 0; i < n; ++i) {
                if (count[static_cast<std::size_t>(st.assign[static_cast<std::size_t>(i)])] < 2) continue;
                if (worst < 0 || dist[i] > dist[worst]) worst = i;
            }
            --count[static_cast<std::size_t>(st.assign[static_cast<std::size_t>(worst)])];
            st.assign[static_cast<std::size_t>(worst)] = k;
            ++count[static_cast<std::size_t>(k)];
            dist[worst] = 0.0;
            repaired = true;
        }
        st.repaired = st.repaired || repaired;

        st.centers.setZero();
        for (Eigen::Index i = 0; i < n; ++i) st.centers.row(st.assign[static_cast<std::size_t>(i)]) += points.row(i);
        for (int k = 0; k < K; ++k) st.centers.row(k) /= static_cast<double>(count[static_cast<std::size_t>(k)]);

        st.objective = 0.0;
        for (Eigen::Index i = 0; i < n; ++i)
            st.objective += (points.row(i) - st.centers.row(st.assign[static_cast<std::size_t>(i)])).squaredNorm();
        st.rounds = round;
        if (observer) observer(RoundInfo{restart, round, st.objective, repaired});

        if (st.assign == prev) {
            st.converged = true;
            break;
        }
        prev = st.assign;
    }
    hartigan(points, K, st);
    if (observer) observer(RoundInfo{restart, st.rounds + 1, st.objective, false});
    return st;
}

}  // namespace

ClusterSolution minimize_q1(const Matrix& points, int K, int n_restarts, std::uint64_t seed, const RoundObserver& observer) {
    detail::check_cluster_request(points, K, n_restarts);
    Restart best;
    int best_index = -1;
    for (int r = 0; r < n_restarts; ++r) {
        Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(r)}));
        Restart cur = lloyd(points, K, rng, r, observer);
        if (best_index < 0 || cur.objective < best.objective) {
            best = std::move(cur);
            best_index = r;
        }
    }

    ClusterSolution sol;
    sol.labels.resize(best.assign.size());
    for (std::size_t i = 0; i < best.assign.size(); ++i) sol.labels[i] = best.assign[i] + 1;
    sol.objective = q1_value(sol.labels, points);
    for (int k = 0; k < K; ++k) sol.centroids.push_back(best.centers.row(k).transpose());
    sol.n_iters = best.rounds;
    sol.n_restarts_used = n_restarts;
    sol.best_restart = best_index;
    sol.converged = best.converged;
    sol.degenerate = best.repaired;
    return sol;
}

}  // namespace blocksel
