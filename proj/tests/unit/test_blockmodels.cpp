#include <doctest.h>

#include <random>
#include <sstream>

#include "blocksel/blockmodels.hpp"
#include "blocksel/error.hpp"
#include "blocksel/rng.hpp"

using namespace blocksel;

namespace {

Matrix table1_omega() {
    Matrix m(3, 3);
    m << 4, 2, 1, 2, 4, 1, 1, 1, 4;
    return m;
}

double expected_pairs(const ProbMatrix& p) { return p.p.sum() / 2.0; }

}  // namespace

TEST_CASE("single-block SBM probability matrix") {
    SbmParams s{1, Matrix::Constant(1, 1, 0.3), {1, 1, 1}};
    auto p = prob_matrix(s);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(p.p(i, j) == (i == j ? 0.0 : 0.3));
}

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(prob_matrix(SbmParams{2, Matrix::Constant(2, 2, 0.3), {1, 1, 1}}), std::invalid_argument);
    Matrix asym(2, 2);
    asym << 0.1, 0.2, 0.3, 0.1;
    CHECK_THROWS_AS(prob_matrix(SbmParams{2, asym, {1, 2}}), std::invalid_argument);
    CHECK_THROWS_AS(prob_matrix(SbmParams{1, Matrix::Constant(1, 1, 1.5), {1, 1}}), std::invalid_argument);
    Vector theta(2);
    theta << 0.5, 0.4;
    CHECK_THROWS_AS(prob_matrix(DcbmParams{1, Matrix::Constant(1, 1, 0.5), theta, {1, 1}}), std::invalid_argument);
}

TEST_CASE("nesting identities on fuzzed parameters") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 100; ++t) {
        const int K = 1 + static_cast<int>(rng() % 4);
        const int n = K + static_cast<int>(rng() % 20);
        Labels labels(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) labels[static_cast<std::size_t>(i)] = i < K ? i + 1 : 1 + static_cast<int>(rng() % static_cast<unsigned>(K));
        Matrix omega(K, K);
        for (int a = 0; a < K; ++a)
            for (int b = 0; b <= a; ++b) omega(a, b) = omega(b, a) = u(rng);

        auto sbm = prob_matrix(SbmParams{K, omega, labels});
        auto dcbm1 = prob_matrix(DcbmParams{K, omega, Vector::Ones(n), labels});
        CHECK((sbm.p - dcbm1.p).cwiseAbs().maxCoeff() == 0.0);

        Vector theta(n);
        for (int i = 0; i < n; ++i) theta[i] = u(rng) + 1e-3;
        auto d = normalize_theta(DcbmParams{K, omega, theta, labels});
        d.omega = d.omega / std::max(1.0, d.omega.maxCoeff());
        auto dp = prob_matrix(d);
        Matrix lambda(n, K);
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < K; ++k) lambda(i, k) = d.theta[i] * std::sqrt(d.omega(labels[static_cast<std::size_t>(i)] - 1, k));
        auto pp = prob_matrix(PabmParams{K, lambda, labels});
        CHECK((pp.p - dp.p).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("normalize_theta leaves P unchanged") {
    Vector theta(4);
    theta << 0.2, 0.4, 0.3, 0.6;
    Matrix omega(2, 2);
    omega << 1.0, 0.5, 0.5, 1.0;
    Labels labels{1, 1, 2, 2};
    auto d = normalize_theta(DcbmParams{2, omega, theta, labels});
    CHECK(d.theta[1] == 1.0);
    CHECK(d.theta[3] == 1.0);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            const double raw = theta[i] * omega(labels[static_cast<std::size_t>(i)] - 1, labels[static_cast<std::size_t>(j)] - 1) * theta[j];
            const double now = d.theta[i] * d.omega(labels[static_cast<std::size_t>(i)] - 1, labels[static_cast<std::size_t>(j)] - 1) * d.theta[j];
            CHECK(now == doctest::Approx(raw).epsilon(1e-14));
        }
}

TEST_CASE("sampling extremes") {
    const int n = 12;
    ProbMatrix ones{Matrix::Ones(n, n)};
    ones.p.diagonal().setZero();
    CHECK(sample_graph(ones, 1).num_edges() == static_cast<std::size_t>(n * (n - 1) / 2));
    CHECK(sample_graph(ProbMatrix{Matrix::Zero(n, n)}, 1).num_edges() == 0);
}

TEST_CASE("half-probability edge count within four sigma") {
    const int n = 500;
    ProbMatrix p{Matrix::Constant(n, n, 0.5)};
    p.p.diagonal().setZero();
    const double pairs = n * (n - 1) / 2.0;
    const double mean = pairs * 0.5, sd = std::sqrt(pairs * 0.25);
    const auto m = static_cast<double>(sample_graph(p, 77).num_edges());
    CHECK(std::abs(m - mean) <= 4 * sd);
}

TEST_CASE("mean edge count over seeds matches the sum of P") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int n = 40;
    Matrix m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j) m(i, j) = m(j, i) = i == j ? 0.0 : u(rng);
    ProbMatrix p{m};
    double var = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) var += m(i, j) * (1 - m(i, j));
    const int seeds = 2000;
    double total = 0.0;
    for (int s = 0; s < seeds; ++s) total += static_cast<double>(sample_graph(p, static_cast<std::uint64_t>(s)).num_edges());
    CHECK(std::abs(total / seeds - expected_pairs(p)) <= 3 * std::sqrt(var / seeds));
}

TEST_CASE("generators are deterministic in the seed") {
    auto a = gen_sbm(200, {0.5, 0.5}, homophily_omega(2, 0.5), SparsityTarget::density(0.05), 5);
    auto b = gen_sbm(200, {0.5, 0.5}, homophily_omega(2, 0.5), SparsityTarget::density(0.05), 5);
    auto c = gen_sbm(200, {0.5, 0.5}, homophily_omega(2, 0.5), SparsityTarget::density(0.05), 6);
    CHECK(a.graph == b.graph);
    CHECK_FALSE(a.graph == c.graph);
    auto d1 = gen_dcbm(200, {0.5, 0.5}, homophily_omega(2, 0.5), ThetaLaw::beta(1, 5), SparsityTarget::density(0.05), 5, true);
    auto d2 = gen_dcbm(200, {0.5, 0.5}, homophily_omega(2, 0.5), ThetaLaw::beta(1, 5), SparsityTarget::density(0.05), 5, true);
    CHECK(d1.graph == d2.graph);
    CHECK(gen_pabm(90, 3, std::nullopt, 3).graph == gen_pabm(90, 3, std::nullopt, 3).graph);
}

TEST_CASE("SBM density target on the three-block configuration") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        auto gen = gen_sbm(1000, {0.25, 0.25, 0.5}, table1_omega(), SparsityTarget::density(0.05), seed);
        CHECK(std::abs(density(gen.graph) - 0.05) <= 0.005);
        CHECK(prob_matrix(gen.params).expected_density() == doctest::Approx(0.05).epsilon(1e-12));
    }
}

TEST_CASE("block labels use contiguous blocks") {
    auto l = block_labels(8, {0.25, 0.25, 0.5});
    CHECK(l == Labels{1, 1, 2, 2, 3, 3, 3, 3});
    CHECK(block_labels(10, {1.0 / 3, 1.0 / 3, 1.0 / 3}).size() == 10);
    CHECK_THROWS_AS(block_labels(10, {0.5, 0.6}), std::invalid_argument);
}

TEST_CASE("identity base matrix gives disjoint blocks") {
    auto gen = gen_sbm(100, {0.5, 0.5}, Matrix::Identity(2, 2), SparsityTarget::density(0.1), 3);
    for (const Edge& e : gen.graph.edges()) CHECK(gen.params.labels[e.u] == gen.params.labels[e.v]);
    CHECK(gen.graph.num_edges() > 0);
}

TEST_CASE("homophily ratio is exact") {
    auto gen = gen_sbm(300, {1.0 / 3, 1.0 / 3, 1.0 / 3}, homophily_omega(3, 0.5), SparsityTarget::avg_degree(20), 1);
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            if (a != b) CHECK(gen.params.omega(a, b) == doctest::Approx(0.5 * gen.params.omega(a, a)).epsilon(1e-15));
}

TEST_CASE("infeasible targets raise") {
    CHECK_THROWS_AS(gen_sbm(50, {0.5, 0.5}, Matrix::Identity(2, 2), SparsityTarget::density(0.9), 1), InfeasibleError);
    CHECK_THROWS_AS(gen_pabm(90, 3, 0.9, 1), InfeasibleError);
    CHECK_THROWS_AS(gen_pabm(91, 3, std::nullopt, 1), std::invalid_argument);
}

TEST_CASE("Pareto sampler mean") {
    Rng rng(123);
    double sum = 0.0;
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) sum += sample_power_law(rng, 1.0, 5.0);
    CHECK(std::abs(sum / draws - 4.0 / 3.0) <= 0.02 * 4.0 / 3.0);
}

TEST_CASE("constant theta reduces DCBM to SBM") {
    auto d = gen_dcbm(120, {0.5, 0.5}, homophily_omega(2, 0.3), ThetaLaw::constant(), SparsityTarget::density(0.1), 2);
    auto s = gen_sbm(120, {0.5, 0.5}, homophily_omega(2, 0.3), SparsityTarget::density(0.1), 2);
    CHECK((prob_matrix(d.params).p - prob_matrix(s.params).p).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("DCBM average degree target on the power-law configuration") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        auto gen = gen_dcbm(600, {1.0 / 3, 1.0 / 3, 1.0 / 3}, homophily_omega(3, 0.5), ThetaLaw::power_law(1, 5),
                            SparsityTarget::avg_degree(20), seed, true);
        CHECK(std::abs(avg_degree(gen.graph) - 20.0) <= 2.0);
        for (int k = 1; k <= 3; ++k) {
            double mx = 0.0;
            for (std::size_t i = 0; i < gen.params.labels.size(); ++i)
                if (gen.params.labels[i] == k) mx = std::max(mx, gen.params.theta[static_cast<Eigen::Index>(i)]);
            CHECK(mx == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("clamped DCBM meets the target with P capped at one") {
    const std::vector<double> f{1.0 / 3, 1.0 / 3, 1.0 / 3};
    int infeasible = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        try {
            gen_dcbm(600, f, homophily_omega(3, 0.2), ThetaLaw::power_law(1, 5), SparsityTarget::avg_degree(40), seed, false);
            continue;
        } catch (const InfeasibleError&) {
            ++infeasible;
        }
        auto gen = gen_dcbm(600, f, homophily_omega(3, 0.2), ThetaLaw::power_law(1, 5), SparsityTarget::avg_degree(40), seed, true);
        CHECK(gen.params.clamp);
        auto p = prob_matrix(gen.params);
        CHECK(p.p.maxCoeff() <= 1.0);
        CHECK(p.p.sum() / 600.0 == doctest::Approx(40.0).epsilon(1e-9));
    }
    CHECK(infeasible > 0);
}

TEST_CASE("PABM expected density without scaling") {
    // Same-block pairs have mean (2/3)^2, cross pairs (1/3)^2.
    const double k2 = 0.5 * 4.0 / 9.0 + 0.5 * 1.0 / 9.0;
    const double k3 = 4.0 / 27.0 + 2.0 / 27.0;
    double d2 = 0.0, d3 = 0.0;
    for (std::uint64_t s = 1; s <= 5; ++s) {
        d2 += prob_matrix(gen_pabm(900, 2, std::nullopt, s).params).expected_density() / 5;
        d3 += prob_matrix(gen_pabm(900, 3, std::nullopt, s).params).expected_density() / 5;
    }
    CHECK(std::abs(d2 - k2) <= 0.005);
    CHECK(std::abs(d2 - 0.28) <= 0.01);
    CHECK(std::abs(d3 - k3) <= 0.005);
}

TEST_CASE("PABM density scaling") {
    auto gen = gen_pabm(900, 2, 0.05, 4);
    CHECK(prob_matrix(gen.params).expected_density() == doctest::Approx(0.05).epsilon(1e-10));
    CHECK(std::abs(density(gen.graph) - 0.05) <= 0.003);
}

TEST_CASE("all-one popularity gives the complete graph") {
    PabmParams p{2, Matrix::Ones(6, 2), {1, 1, 1, 2, 2, 2}};
    CHECK(sample_graph(prob_matrix(p), 1).num_edges() == 15);
}

TEST_CASE("fit_sbm hand counts") {
    Graph g(4, {{0, 1}, {2, 3}});
    auto fit = fit_sbm(g, {1, 1, 2, 2});
    Matrix want(2, 2);
    want << 1, 0, 0, 1;
    CHECK(fit.omega == want);

    std::vector<Edge> all;
    for (node_t i = 0; i < 5; ++i)
        for (node_t j = i + 1; j < 5; ++j) all.push_back({i, j});
    CHECK(fit_sbm(Graph(5, all), {1, 2, 1, 2, 2}).omega == Matrix::Ones(2, 2));
    CHECK(fit_sbm(Graph(5, {}), {1, 2, 1, 2, 2}).omega == Matrix::Zero(2, 2));
}

TEST_CASE("fit_sbm singleton block") {
    auto fit = fit_sbm(Graph(3, {{0, 1}}), {1, 1, 2});
    CHECK(fit.singleton_blocks == 1);
    CHECK(fit.omega(1, 1) == 0.0);
}

TEST_CASE("fit_sbm recovers the block matrix") {
    int good = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        auto gen = gen_sbm(2000, {0.25, 0.25, 0.5}, table1_omega(), SparsityTarget::density(0.05), seed);
        auto fit = fit_sbm(gen.graph, gen.params.labels);
        if ((fit.omega - gen.params.omega).cwiseAbs().maxCoeff() <= 0.01) ++good;
    }
    CHECK(good >= 19);
}

TEST_CASE("fit_dcbm on a path") {
    Graph path(3, {{0, 1}, {1, 2}});
    auto fit = fit_dcbm(path, {1, 1, 2});
    CHECK(fit.theta[0] == doctest::Approx(1.0 / 3));
    CHECK(fit.theta[1] == doctest::Approx(2.0 / 3));
    CHECK(fit.theta[2] == doctest::Approx(1.0));
    Matrix o(2, 2);
    o << 2, 1, 1, 0;
    CHECK(fit.block_degree == o);
    CHECK(fit.p.p(0, 1) == doctest::Approx(4.0 / 9));
}

TEST_CASE("fit_dcbm equals fit_sbm on a degree-regular bipartite split") {
    // C6 with alternating labels: every edge crosses, degrees are constant.
    Graph c6(6, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {0, 5}});
    Labels l{1, 2, 1, 2, 1, 2};
    auto a = fit_dcbm(c6, l);
    auto b = fit_sbm(c6, l);
    CHECK((a.p.p - b.p.p).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("fit_dcbm clamps and rejects zero-degree blocks") {
    // Hub in its own block: theta_0 = 1, theta_1 = 2/5, O_12 = 3, so P_01 = 1.2 before clamping.
    Graph g(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}});
    auto fit = fit_dcbm(g, {1, 2, 2, 2});
    CHECK(fit.p.p.maxCoeff() <= 1.0);
    CHECK(fit.p.p(0, 1) == 1.0);
    CHECK(fit.p.p(0, 3) == doctest::Approx(0.6));
    CHECK_THROWS_AS(fit_dcbm(Graph(3, {{0, 1}}), {1, 1, 2}), InfeasibleError);
}

TEST_CASE("params round trip through text") {
    auto d = gen_dcbm(30, {0.5, 0.5}, homophily_omega(2, 0.4), ThetaLaw::beta(1, 5), SparsityTarget::density(0.1), 8, true);
    std::stringstream ss;
    write_params(ss, d.params);
    auto back = std::get<DcbmParams>(read_params(ss));
    CHECK(back.labels == d.params.labels);
    CHECK((back.theta - d.params.theta).norm() == 0.0);
    CHECK((back.omega - d.params.omega).norm() == 0.0);
    CHECK(back.clamp == d.params.clamp);

    auto p = gen_pabm(12, 2, std::nullopt, 1);
    std::stringstream sp;
    write_params(sp, p.params);
    CHECK((std::get<PabmParams>(read_params(sp)).lambda - p.params.lambda).norm() == 0.0);

    std::istringstream bad("model sbm\nK 1\nn 2\nlabels 1 1\nmatrix omega 1 1\n");
    CHECK_THROWS(read_params(bad));
}
