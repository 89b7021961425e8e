#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <json.hpp>

#include "blocksel/blockmodels.hpp"
#include "blocksel/cluster.hpp"
#include "blocksel/graph.hpp"

namespace blocksel {

/// Outcome of one parametric-bootstrap test.
struct TestResult {
    double statistic = 0.0;
    std::vector<double> boot_stats;
    double p_value = 1.0;
    double alpha = 0.05;
    bool rejected = false;
    Model null_model = Model::SBM;
    Model alt_model = Model::DCBM;
    std::uint64_t seed = 0;
    int resampled_replicates = 0;  // replicates redrawn after a numerical failure
};

struct TestOptions {
    int replicates = 200;  // R
    double alpha = 0.05;
    int restarts = 0;      // 0 = module defaults (10 for Q1, 20 for Q2/Q3)
    std::uint64_t seed = 0;
    int threads = 1;
    /// (1 + #{T* >= T}) / (1 + R) instead of #{T* >= T} / R.
    bool corrected_p_value = false;
};

/// #{r : boot[r] >= statistic} / R, or the +1 corrected form.
double bootstrap_p_value(double statistic, std::span<const double> boot, bool corrected = false);

/// H0: SBM vs H1: DCBM with the minimized Q1 on the K-dim embedding as statistic.
std::pair<TestResult, ClusterSolution> test_sbm_vs_dcbm(const Graph& g, int K, const TestOptions& options);

/// H0: DCBM vs H1: PABM with the minimized Q2 on the K-dim embedding as statistic.
std::pair<TestResult, ClusterSolution> test_dcbm_vs_pabm(const Graph& g, int K, const TestOptions& options);

struct WorkflowTiming {
    double test1_seconds = 0.0;
    double test2_seconds = 0.0;
    double pabm_seconds = 0.0;
};

struct WorkflowResult {
    Model selected_model = Model::SBM;
    Labels labels;
    ClusterSolution solution;  // minimizer that produced labels
    TestResult test1;
    std::optional<TestResult> test2;
    int dim_sbm_dcbm = 0;      // K
    int dim_pabm = 0;          // K^2 (0 when the PABM stage did not run)
    WorkflowTiming timing;
};

/// Sequential gate: SBM vs DCBM, then DCBM vs PABM, then Q3 labels on the
/// K^2-dim embedding if both tests reject. Throws InfeasibleError if K^2 > n.
WorkflowResult run_workflow(const Graph& g, int K, const TestOptions& options);

/// Decision-consistency invariants of a workflow result.
bool is_consistent(const WorkflowResult& result);

/// Machine-readable record; timings are included only on request so that
/// reports from identical inputs are byte-identical.
nlohmann::ordered_json to_json(const TestResult& t);
nlohmann::ordered_json to_json(const WorkflowResult& r, bool include_timing = false);

}  // namespace blocksel
