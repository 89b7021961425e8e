#include <doctest.h>

#include <random>
#include <sstream>

#include "blocksel/blockmodels.hpp"
#include "blocksel/cluster.hpp"
#include "oracles.hpp"

using namespace blocksel;

namespace {

Matrix random_points(std::mt19937_64& rng, int n, int d) {
    std::normal_distribution<double> g;
    Matrix m(n, d);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
    return m;
}

// Points scattered along K random lines through the origin.
Matrix line_points(std::mt19937_64& rng, int n, int d, int K, Labels& truth) {
    std::normal_distribution<double> g;
    Matrix dirs = oracle::random_orthogonal(rng, d).leftCols(K);
    Matrix m(n, d);
    truth.assign(static_cast<std::size_t>(n), 0);
    for (int i = 0; i < n; ++i) {
        const int k = i % K;
        truth[static_cast<std::size_t>(i)] = k + 1;
        const double s = (g(rng) > 0 ? 1.0 : -1.0) * (0.5 + std::abs(g(rng)));
        m.row(i) = s * dirs.col(k).transpose();
        for (int c = 0; c < d; ++c) m(i, c) += 0.01 * g(rng);
    }
    return m;
}

Graph two_cliques(int m) {
    std::vector<Edge> e;
    for (int b = 0; b < 2; ++b)
        for (int i = 0; i < m; ++i)
            for (int j = i + 1; j < m; ++j) e.push_back({static_cast<node_t>(b * m + i), static_cast<node_t>(b * m + j)});
    e.push_back({0, static_cast<node_t>(m)});
    return Graph(static_cast<std::size_t>(2 * m), e);
}

}  // namespace

TEST_CASE("q1 on a hand example") {
    Matrix p(4, 1);
    p << 0, 2, 10, 10;
    CHECK(q1_value({1, 1, 2, 2}, p) == doctest::Approx(2.0));
    CHECK(q1_value({1, 2, 2, 2}, p) == doctest::Approx(128.0 / 3.0));
}

TEST_CASE("q1 and subspace objectives agree with the oracles") {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 50; ++t) {
        const int n = 12, d = 3, K = 3;
        Matrix pts = random_points(rng, n, d);
        Labels l(static_cast<std::size_t>(n));
        for (auto& x : l) x = 1 + static_cast<int>(rng() % K);
        CHECK(q1_value(l, pts) == doctest::Approx(oracle::centroid_cost(l, pts, K)).epsilon(1e-10));
        CHECK(q_subspace_value(l, pts, 1) == doctest::Approx(oracle::subspace_cost(l, pts, K, 1)).epsilon(1e-9));
        CHECK(q_subspace_value(l, pts, 2) == doctest::Approx(oracle::subspace_cost(l, pts, K, 2)).epsilon(1e-9));
    }
}

TEST_CASE("collinear clusters have zero rank-one residual") {
    Matrix p(4, 2);
    p << 1, 1, -2, -2, 1, -1, 3, -3;
    CHECK(q_subspace_value({1, 1, 2, 2}, p, 1) == doctest::Approx(0.0).scale(1.0));
    CHECK(q_subspace_value({1, 2, 1, 2}, p, 1) > 1.0);
    CHECK(q_subspace_value({1, 2, 1, 2}, p, 2) == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("minimizers reach the brute-force optimum") {
    std::mt19937_64 rng(9);
    int q1_hits = 0, q2_hits = 0;
    const int trials = 40;
    for (int t = 0; t < trials; ++t) {
        const int n = 9, d = 2, K = t % 2 ? 3 : 2;
        Matrix pts = random_points(rng, n, d);
        const double best1 = oracle::brute_force_min(n, K, [&](const std::vector<int>& l) { return oracle::centroid_cost(l, pts, K); });
        const double best2 = oracle::brute_force_min(n, K, [&](const std::vector<int>& l) { return oracle::subspace_cost(l, pts, K, 1); });
        auto s1 = minimize_q1(pts, K, kDefaultQ1Restarts, static_cast<std::uint64_t>(t));
        auto s2 = minimize_q_subspace(pts, K, 1, kDefaultSubspaceRestarts, static_cast<std::uint64_t>(t));
        CHECK(s1.objective >= best1 - 1e-9);
        CHECK(s2.objective >= best2 - 1e-9);
        if (s1.objective <= best1 + 1e-9 * std::max(1.0, best1)) ++q1_hits;
        if (s2.objective <= best2 + 1e-9 * std::max(1.0, best2)) ++q2_hits;
        CHECK(s1.objective == doctest::Approx(q1_value(s1.labels, pts)).epsilon(1e-10));
        CHECK(s2.objective == doctest::Approx(q_subspace_value(s2.labels, pts, 1)).epsilon(1e-9).scale(1.0));
    }
    CHECK(q1_hits >= trials * 95 / 100);
    CHECK(q2_hits >= trials * 90 / 100);
}

TEST_CASE("objective never increases between rounds") {
    std::mt19937_64 rng(17);
    for (int t = 0; t < 200; ++t) {
        const int n = 20 + static_cast<int>(rng() % 40), d = 2 + static_cast<int>(rng() % 3), K = 2 + static_cast<int>(rng() % 3);
        Matrix pts = random_points(rng, n, d);
        const int r = t % 3 == 2 ? K : 1;
        std::vector<std::vector<double>> trace;
        auto obs = [&](const RoundInfo& info) {
            if (static_cast<std::size_t>(info.restart) >= trace.size()) trace.resize(static_cast<std::size_t>(info.restart) + 1);
            auto& tr = trace[static_cast<std::size_t>(info.restart)];
            if (!tr.empty() && !info.repaired) CHECK(info.objective <= tr.back() * (1 + 1e-12) + 1e-12);
            tr.push_back(info.objective);
        };
        if (t % 3 == 0)
            minimize_q1(pts, K, 3, static_cast<std::uint64_t>(t), obs);
        else
            minimize_q_subspace(pts, K, r, 3, static_cast<std::uint64_t>(t), {}, obs);
        CHECK_FALSE(trace.empty());
    }
}

TEST_CASE("minimizers are deterministic in the seed") {
    std::mt19937_64 rng(3);
    Matrix pts = random_points(rng, 60, 3);
    CHECK(minimize_q1(pts, 3, 5, 11).labels == minimize_q1(pts, 3, 5, 11).labels);
    CHECK(minimize_q_subspace(pts, 3, 1, 5, 11).labels == minimize_q_subspace(pts, 3, 1, 5, 11).labels);
}

TEST_CASE("rotation and scale invariance of the subspace objective") {
    std::mt19937_64 rng(23);
    for (int t = 0; t < 30; ++t) {
        Labels truth;
        Matrix pts = line_points(rng, 60, 4, 3, truth);
        Matrix rot = pts * oracle::random_orthogonal(rng, 4);
        CHECK(q_subspace_value(truth, rot, 1) == doctest::Approx(q_subspace_value(truth, pts, 1)).epsilon(1e-9).scale(1e-9));
        CHECK(q_subspace_value(truth, 3.0 * pts, 1) == doctest::Approx(9.0 * q_subspace_value(truth, pts, 1)).epsilon(1e-9).scale(1e-9));
        CHECK(q1_value(truth, rot) == doctest::Approx(q1_value(truth, pts)).epsilon(1e-9));
        auto a = minimize_q_subspace(pts, 3, 1, kDefaultSubspaceRestarts, 1);
        auto b = minimize_q_subspace(rot, 3, 1, kDefaultSubspaceRestarts, 1);
        CHECK(mislabel_rate(a.labels, truth, 3) == 0.0);
        CHECK(mislabel_rate(b.labels, truth, 3) == 0.0);
    }
}

TEST_CASE("subspace clustering separates lines that centroids cannot") {
    std::mt19937_64 rng(31);
    Labels truth;
    Matrix pts = line_points(rng, 300, 3, 3, truth);
    auto s = minimize_q_subspace(pts, 3, 1, kDefaultSubspaceRestarts, 2);
    CHECK(mislabel_rate(s.labels, truth, 3) == 0.0);
    CHECK(s.bases.size() == 3);
    for (const auto& v : s.bases) CHECK((v.transpose() * v - Matrix::Identity(v.cols(), v.cols())).norm() <= 1e-10);
}

TEST_CASE("starting from labels") {
    std::mt19937_64 rng(37);
    Labels truth;
    Matrix pts = line_points(rng, 90, 3, 3, truth);
    auto s = minimize_q_subspace(pts, 3, 1, 1, 0, SubspaceInit::from_labels(truth));
    CHECK(mislabel_rate(s.labels, truth, 3) == 0.0);
    CHECK(s.objective <= q_subspace_value(truth, pts, 1) + 1e-12);
}

TEST_CASE("argument checks") {
    Matrix pts = Matrix::Zero(3, 2);
    CHECK_THROWS_AS(minimize_q1(pts, 4, 1, 0), std::invalid_argument);
    CHECK_THROWS_AS(minimize_q1(pts, 0, 1, 0), std::invalid_argument);
    CHECK_THROWS_AS(minimize_q_subspace(pts, 4, 1, 1, 0), std::invalid_argument);
}

TEST_CASE("K equal to n puts every point alone") {
    std::mt19937_64 rng(41);
    Matrix pts = random_points(rng, 5, 2);
    auto s = minimize_q1(pts, 5, 3, 0);
    CHECK(s.objective == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("mislabel rate examples") {
    CHECK(mislabel_rate({1, 1, 2, 2}, {2, 2, 1, 1}, 2) == 0.0);
    CHECK(mislabel_rate({1, 2, 1, 2}, {1, 1, 2, 2}, 2) == 0.5);
    CHECK(mislabel_rate({1, 1, 1, 2}, {1, 1, 2, 2}, 2) == 0.25);
    CHECK(mislabel_rate({3, 1, 2}, {1, 2, 3}, 3) == 0.0);
}

TEST_CASE("mislabel rate matches enumeration, including the assignment path") {
    std::mt19937_64 rng(43);
    for (int K : {2, 4, 9}) {
        for (int t = 0; t < (K == 9 ? 2 : 30); ++t) {
            const int n = 25;
            Labels a(n), b(n);
            for (int i = 0; i < n; ++i) {
                a[static_cast<std::size_t>(i)] = 1 + static_cast<int>(rng() % static_cast<unsigned>(K));
                b[static_cast<std::size_t>(i)] = 1 + static_cast<int>(rng() % static_cast<unsigned>(K));
            }
            CHECK(mislabel_rate(a, b, K) == doctest::Approx(oracle::mislabel(a, b, K)));
        }
    }
}

TEST_CASE("assignment solver") {
    Matrix w(3, 3);
    w << 1, 2, 3, 2, 4, 6, 3, 6, 9;
    auto col = hungarian_max(w);
    double total = 0.0;
    for (int i = 0; i < 3; ++i) total += w(i, col[static_cast<std::size_t>(i)]);
    CHECK(total == 14.0);
    Matrix id = Matrix::Identity(4, 4);
    CHECK(hungarian_max(id) == std::vector<int>{0, 1, 2, 3});
}

TEST_CASE("spectral baselines split two cliques") {
    Graph g = two_cliques(10);
    Labels truth(20);
    for (int i = 0; i < 20; ++i) truth[static_cast<std::size_t>(i)] = i < 10 ? 1 : 2;
    CHECK(mislabel_rate(sc_l(g, 2).labels, truth, 2) == 0.0);
    CHECK(mislabel_rate(rsc_l(g, 2).labels, truth, 2) == 0.0);
    // The K^2-dim embedding picks up part of the degenerate -1 eigenspace, so
    // the two bridge endpoints may land on the wrong side.
    CHECK(mislabel_rate(osc(g, 2).labels, truth, 2) <= 0.1);
}

TEST_CASE("labels csv") {
    std::ostringstream a, b;
    write_labels_csv(a, {1, 2});
    CHECK(a.str() == "node,label\n0,1\n1,2\n");
    std::vector<std::string> ids{"x", "y"};
    write_labels_csv(b, {2, 1}, ids);
    CHECK(b.str() == "node,label\nx,2\ny,1\n");
}
