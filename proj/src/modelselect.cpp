#include "blocksel/modelselect.hpp"

#include <atomic>
#include <chrono>
#include <stdexcept>

#include "blocksel/error.hpp"
#include "blocksel/parallel.hpp"
#include "blocksel/rng.hpp"
#include "blocksel/spectral.hpp"

namespace blocksel {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

int restarts_or(int requested, int fallback) { return requested > 0 ? requested : fallback; }

ClusterSolution q1_min(const Graph& g, int K, int restarts, std::uint64_t seed) {
    auto emb = ase(g, K);
    return minimize_q1(emb.rows, K, restarts, seed);
}

ClusterSolution q2_min(const Graph& g, int K, int restarts, std::uint64_t seed) {
    auto emb = ase(g, K);
    return minimize_q_subspace(emb.rows, K, 1, restarts, seed);
}

void check_test_request(const Graph& g, int K, const TestOptions& options) {
    if (K < 1) throw std::invalid_argument("K must be positive");
    if (static_cast<std::size_t>(K) > g.num_nodes()) throw InfeasibleError("K exceeds the number of nodes");
    if (options.replicates < 1) throw std::invalid_argument("bootstrap needs at least one replicate");
    if (!(options.alpha > 0.0 && options.alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0,1)");
}

// Draws R graphs from the fitted null and records the minimized statistic on
// each. A replicate that fails numerically is redrawn from a fresh seed, with
// at most 3R draws in total.
template <typename Statistic>
TestResult bootstrap(double observed, const ProbMatrix& null_fit, const TestOptions& options, Statistic&& statistic) {
    TestResult res;
    res.statistic = observed;
    res.alpha = options.alpha;
    res.seed = options.seed;
    const auto R = static_cast<std::size_t>(options.replicates);
    res.boot_stats.assign(R, 0.0);
    std::atomic<int> failures{0};

    parallel_for(R, options.threads, [&](std::size_t r) {
        for (std::uint64_t attempt = 0;; ++attempt) {
            try {
                Graph a = sample_graph(null_fit, derive_seed(options.seed, {1, r, attempt}));
                res.boot_stats[r] = statistic(a, derive_seed(options.seed, {2, r, attempt}));
                return;
            } catch (const NumericalError&) {
                if (static_cast<std::size_t>(++failures) > 2 * R)
                    throw NumericalError("bootstrap: too many failed replicates");
            }
        }
    });
    res.resampled_replicates = failures.load();
    res.p_value = bootstrap_p_value(observed, res.boot_stats, options.corrected_p_value);
    res.rejected = res.p_value < options.alpha;
    return res;
}

}  // namespace

double bootstrap_p_value(double statistic, std::span<const double> boot, bool corrected) {
    if (boot.empty()) throw std::invalid_argument("no bootstrap replicates");
    std::size_t hits = 0;
    for (double b : boot)
        if (b >= statistic) ++hits;
    if (corrected) return (1.0 + static_cast<double>(hits)) / (1.0 + static_cast<double>(boot.size()));
    return static_cast<double>(hits) / static_cast<double>(boot.size());
}

std::pair<TestResult, ClusterSolution> test_sbm_vs_dcbm(const Graph& g, int K, const TestOptions& options) {
    check_test_request(g, K, options);
    const int restarts = restarts_or(options.restarts, kDefaultQ1Restarts);
    ClusterSolution sol = q1_min(g, K, restarts, derive_seed(options.seed, {0}));
    SbmFit fit = fit_sbm(g, sol.labels);
    TestResult res = bootstrap(sol.objective, fit.p, options,
                               [&](const Graph& a, std::uint64_t s) { return q1_min(a, K, restarts, s).objective; });
    res.null_model = Model::SBM;
    res.alt_model = Model::DCBM;
    return {std::move(res), std::move(sol)};
}

std::pair<TestResult, ClusterSolution> test_dcbm_vs_pabm(const Graph& g, int K, const TestOptions& options) {
    check_test_request(g, K, options);
    const int restarts = restarts_or(options.restarts, kDefaultSubspaceRestarts);
    ClusterSolution sol = q2_min(g, K, restarts, derive_seed(options.seed, {0}));
    DcbmFit fit = fit_dcbm(g, sol.labels);
    TestResult res = bootstrap(sol.objective, fit.p, options,
                               [&](const Graph& a, std::uint64_t s) { return q2_min(a, K, restarts, s).objective; });
    res.null_model = Model::DCBM;
    res.alt_model = Model::PABM;
    return {std::move(res), std::move(sol)};
}

WorkflowResult run_workflow(const Graph& g, int K, const TestOptions& options) {
    if (K < 1) throw std::invalid_argument("K must be positive");
    if (static_cast<std::size_t>(K) * static_cast<std::size_t>(K) > g.num_nodes())
        throw InfeasibleError("workflow needs K^2 <= n for the PABM embedding");

    WorkflowResult out;
    out.dim_sbm_dcbm = K;

    TestOptions opt1 = options;
    opt1.seed = derive_seed(options.seed, {101});
    auto t0 = Clock::now();
    auto [test1, sol1] = test_sbm_vs_dcbm(g, K, opt1);
    out.timing.test1_seconds = seconds_since(t0);
    out.test1 = std::move(test1);
    if (!out.test1.rejected) {
        out.selected_model = Model::SBM;
        out.labels = sol1.labels;
        out.solution = std::move(sol1);
        return out;
    }

    TestOptions opt2 = options;
    opt2.seed = derive_seed(options.seed, {102});
    t0 = Clock::now();
    auto [test2, sol2] = test_dcbm_vs_pabm(g, K, opt2);
    out.timing.test2_seconds = seconds_since(t0);
    out.test2 = std::move(test2);
    if (!out.test2->rejected) {
        out.selected_model = Model::DCBM;
        out.labels = sol2.labels;
        out.solution = std::move(sol2);
        return out;
    }

    t0 = Clock::now();
    out.dim_pabm = K * K;
    auto emb = ase(g, out.dim_pabm);
    out.solution = minimize_q_subspace(emb.rows, K, K, restarts_or(options.restarts, kDefaultSubspaceRestarts),
                                       derive_seed(options.seed, {103}));
    out.labels = out.solution.labels;
    out.selected_model = Model::PABM;
    out.timing.pabm_seconds = seconds_since(t0);
    return out;
}

bool is_consistent(const WorkflowResult& r) {
    const int K = r.dim_sbm_dcbm;
    for (int l : r.labels)
        if (l < 1 || l > K) return false;
    auto test_ok = [](const TestResult& t) {
        if (t.boot_stats.empty()) return false;
        const bool p_ok = t.p_value == bootstrap_p_value(t.statistic, t.boot_stats) ||
                          t.p_value == bootstrap_p_value(t.statistic, t.boot_stats, true);
        return p_ok && t.rejected == (t.p_value < t.alpha);
    };
    if (!test_ok(r.test1)) return false;
    if (r.test2 && !test_ok(*r.test2)) return false;
    switch (r.selected_model) {
        case Model::SBM: return !r.test1.rejected && !r.test2;
        case Model::DCBM: return r.test1.rejected && r.test2 && !r.test2->rejected;
        case Model::PABM: return r.test1.rejected && r.test2 && r.test2->rejected;
    }
    return false;
}

nlohmann::ordered_json to_json(const TestResult& t) {
    nlohmann::ordered_json j;
    j["null_model"] = to_string(t.null_model);
    j["alt_model"] = to_string(t.alt_model);
    j["statistic"] = t.statistic;
    j["p_value"] = t.p_value;
    j["alpha"] = t.alpha;
    j["rejected"] = t.rejected;
    j["replicates"] = t.boot_stats.size();
    j["resampled_replicates"] = t.resampled_replicates;
    j["seed"] = t.seed;
    j["boot_stats"] = t.boot_stats;
    return j;
}

nlohmann::ordered_json to_json(const WorkflowResult& r, bool include_timing) {
    nlohmann::ordered_json j;
    j["selected_model"] = to_string(r.selected_model);
    j["objective"] = r.solution.objective;
    j["embedding_dims"] = {r.dim_sbm_dcbm, r.dim_pabm};
    j["test_sbm_vs_dcbm"] = to_json(r.test1);
    j["test_dcbm_vs_pabm"] = r.test2 ? to_json(*r.test2) : nlohmann::ordered_json(nullptr);
    if (include_timing) {
        j["timing_seconds"] = {{"test_sbm_vs_dcbm", r.timing.test1_seconds},
                               {"test_dcbm_vs_pabm", r.timing.test2_seconds},
                               {"pabm_clustering", r.timing.pabm_seconds}};
    }
    return j;
}

}  // namespace blocksel
