#include <algorithm>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "cluster_internal.hpp"

namespace blocksel {

namespace {

struct Restart {
    Labels labels;
    std::vector<Matrix> bases;
    double objective = 0.0;
    int rounds = 0;
    bool converged = false;
    bool repaired = false;
};

Labels random_labels(Eigen::Index n, int K, Rng& rng) {
    // One guaranteed member per cluster, the rest uniform.
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::uniform_int_distribution<int> pick(1, K);
    Labels labels(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) labels[static_cast<std::size_t>(i)] = pick(rng);
    for (int k = 0; k < K; ++k) labels[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])] = k + 1;
    return labels;
}

// Subspace analogue of k-means++: a seed point's local neighborhood (by sign-
// agnostic angle) fixes an initial rank-r basis; later seeds are drawn with
// probability proportional to their residual against the bases so far. The
// start labels are the nearest-subspace assignment.
Labels seeded_labels(const Matrix& points, int K, int r, Rng& rng) {
    const Eigen::Index n = points.rows();
    Matrix unit = points;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double nrm = unit.row(i).norm();
        if (nrm > 0.0) unit.row(i) /= nrm;
    }
    const auto m = static_cast<std::size_t>(std::min<Eigen::Index>(n, std::max(2 * r, 5)));
    std::vector<Matrix> bases;
    Vector resid = points.rowwise().squaredNorm();
    std::uniform_int_distribution<Eigen::Index> any(0, n - 1);
    for (int k = 0; k < K; ++k) {
        Eigen::Index seed_pt = any(rng);
        const double total = resid.sum();
        if (k > 0 && total > 0.0) {
            double target = std::uniform_real_distribution<double>(0.0, total)(rng), acc = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                acc += resid[i];
                if (acc > target && resid[i] > 0.0) {
                    seed_pt = i;
                    break;
                }
            }
        }
        std::vector<std::pair<double, Eigen::Index>> near;
        near.reserve(static_cast<std::size_t>(n));
        for (Eigen::Index i = 0; i < n; ++i) near.emplace_back(-std::abs(unit.row(i).dot(unit.row(seed_pt))), i);
        std::partial_sort(near.begin(), near.begin() + static_cast<std::ptrdiff_t>(m), near.end());
        std::vector<Eigen::Index> members;
        for (std::size_t j = 0; j < m; ++j) members.push_back(near[j].second);
        bases.push_back(detail::cluster_basis(points, members, r));
        for (Eigen::Index i = 0; i < n; ++i)
            resid[i] = std::min(resid[i], detail::projection_residual(points.row(i).transpose(), bases.back()));
    }
    Labels labels(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        int best = 0;
        double best_r = std::numeric_limits<double>::infinity();
        for (int k = 0; k < K; ++k) {
            const double rk = detail::projection_residual(points.row(i).transpose(), bases[static_cast<std::size_t>(k)]);
            if (rk < best_r) {
                best_r = rk;
                best = k;
            }
        }
        labels[static_cast<std::size_t>(i)] = best + 1;
    }
    return labels;
}

double fit_bases(const Matrix& points, const Labels& labels, int K, int r, std::vector<Matrix>& bases) {
    auto members = detail::members_by_cluster(labels, K);
    bases.resize(static_cast<std::size_t>(K));
    double total = 0.0;
    for (int k = 0; k < K; ++k) {
        const auto& mem = members[static_cast<std::size_t>(k)];
        bases[static_cast<std::size_t>(k)] = detail::cluster_basis(points, mem, r);
        const Matrix& v = bases[static_cast<std::size_t>(k)];
        if (mem.empty() || v.cols() == points.cols() || v.cols() == static_cast<Eigen::Index>(mem.size())) continue;
        double frob = 0.0, captured = 0.0;
        for (auto i : mem) {
            frob += points.row(i).squaredNorm();
            captured += (v.transpose() * points.row(i).transpose()).squaredNorm();
        }
        total += std::max(0.0, frob - captured);
    }
    return total;
}

Restart greedy(const Matrix& points, int K, int r, Labels start, int restart, const RoundObserver& observer) {
    const Eigen::Index n = points.rows();
    Restart st;
    st.labels = std::move(start);
    Labels prev;
    bool repaired = false;
    Vector resid(n);

    for (int round = 1; round <= kMaxRounds; ++round) {
        st.objective = fit_bases(points, st.labels, K, r, st.bases);
        st.rounds = round;
        if (observer) observer(RoundInfo{restart, round, st.objective, repaired});
        if (st.labels == prev) {
            st.converged = true;
            break;
        }
        prev = st.labels;

        std::vector<Eigen::Index> count(static_cast<std::size_t>(K), 0);
        for (Eigen::Index i = 0; i < n; ++i) {
            int best = 0;
            double best_r = std::numeric_limits<double>::infinity();
            for (int k = 0; k < K; ++k) {
                const double rk = detail::projection_residual(points.row(i).transpose(), st.bases[static_cast<std::size_t>(k)]);
                if (rk < best_r) {
                    best_r = rk;
                    best = k;
                }
            }
            st.labels[static_cast<std::size_t>(i)] = best + 1;
            resid[i] = best_r;
            ++count[static_cast<std::size_t>(best)];
        }

        repaired = false;
        for (int k = 0; k < K; ++k) {
            if (count[static_cast<std::size_t>(k)] > 0) continue;
            Eigen::Index worst = -1;
            for (Eigen::Index i = 0; i < n; ++i) {
                if (count[static_cast<std::size_t>(st.labels[static_cast<std::size_t>(i)] - 1)] < 2) continue;
                if (worst < 0 || resid[i] > resid[worst]) worst = i;
            }
            --count[static_cast<std::size_t>(st.labels[static_cast<std::size_t>(worst)] - 1)];
            st.labels[static_cast<std::size_t>(worst)] = k + 1;
            ++count[static_cast<std::size_t>(k)];
            resid[worst] = 0.0;
            repaired = true;
        }
        st.repaired = st.repaired || repaired;
    }
    if (!st.converged) st.objective = fit_bases(points, st.labels, K, r, st.bases);
    return st;
}

}  // namespace

ClusterSolution minimize_q_subspace(const Matrix& points, int K, int r, int n_restarts, std::uint64_t seed,
                                    const SubspaceInit& init, const RoundObserver& observer) {
    detail::check_cluster_request(points, K, n_restarts);
    if (r < 1) throw std::invalid_argument("rank must be positive");
    const Eigen::Index n = points.rows();
    if (init.labels) {
        if (static_cast<Eigen::Index>(init.labels->size()) != n) throw std::invalid_argument("initial labels length mismatch");
        for (int l : *init.labels)
            if (l < 1 || l > K) throw std::invalid_argument("initial label out of range");
    }

    const int starts = init.labels ? 1 : n_restarts;
    Restart best;
    int best_index = -1;
    for (int s = 0; s < starts; ++s) {
        Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(s)}));
        // Every fourth restart draws a uniform assignment, the rest a seeded one.
        Labels start = init.labels ? *init.labels : s % 4 ? seeded_labels(points, K, r, rng) : random_labels(n, K, rng);
        Restart cur = greedy(points, K, r, std::move(start), s, observer);
        if (best_index < 0 || cur.objective < best.objective) {
            best = std::move(cur);
            best_index = s;
        }
    }

    ClusterSolution sol;
    sol.labels = std::move(best.labels);
    sol.objective = q_subspace_value(sol.labels, points, r);
    sol.bases = std::move(best.bases);
    sol.n_iters = best.rounds;
    sol.n_restarts_used = starts;
    sol.best_restart = best_index;
    sol.converged = best.converged;
    const Eigen::Index want = std::min<Eigen::Index>(r, points.cols());
    bool small = false;
    for (const Matrix& v : sol.bases) small = small || v.cols() < want;
    sol.degenerate = best.repaired || small;
    return sol;
}

}  // namespace blocksel
