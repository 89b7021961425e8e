#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "blocksel/blockmodels.hpp"
#include "blocksel/graph.hpp"

namespace blocksel {

enum class Study { CommDetSBM, CommDetDCBM, CommDetPABM, TestSbmVsDcbm, TestDcbmVsPabm };

/// Q1/Q2/Q3 are the objective minimizers in community-detection studies and
/// the corresponding bootstrap tests in testing studies.
enum class Method { Q1, Q2, Q3, SCL, RSCL, OSC };

enum class MetricKind { MislabelRate, RejectionRate };

enum class TableLayout { Table1, Table2, Table3, Table4, Table5, Table6, Table7 };

std::string to_string(Study s);
std::string to_string(Method m);
std::string to_string(TableLayout t);
Study parse_study(const std::string& s);
Method parse_method(const std::string& s);
TableLayout parse_table_layout(const std::string& s);

/// One network configuration of a simulation grid.
struct GridPoint {
    Model truth = Model::SBM;  // ignored by community-detection studies, which fix it
    int n = 0;
    int K = 0;
    std::vector<double> fractions;  // empty = equal blocks
    std::optional<Matrix> omega;    // base block matrix (SBM/DCBM)
    std::optional<double> beta;     // or (1 - beta) I + beta 11^T
    SparsityTarget target;
    ThetaLaw theta = ThetaLaw::constant();
    bool clamp = true;  // DCBM: cap P at 1 when the target needs it, instead of failing
};

struct ExperimentSpec {
    Study study = Study::CommDetSBM;
    std::vector<GridPoint> grid;
    int n_replicates = 20;
    int bootstrap = 100;  // R
    double alpha = 0.05;
    int restarts = 0;     // 0 = per-method defaults
    std::uint64_t base_seed = 1;
    std::vector<Method> methods;  // empty = the study's default methods
    int threads = 1;
    std::optional<TableLayout> layout;
};

/// Throws std::invalid_argument describing the first inconsistency.
void validate(const ExperimentSpec& spec);

Model study_truth(Study study, const GridPoint& point);
MetricKind metric_kind(Study study);
std::vector<Method> resolved_methods(const ExperimentSpec& spec);

struct CellResult {
    Method method = Method::Q1;
    std::vector<double> values;       // per replicate; NaN where the replicate failed
    std::vector<std::string> errors;  // per replicate; empty when it succeeded
    double mean = 0.0;
    double se = 0.0;
    int failures = 0;
    bool failed = false;  // more than 10% of replicates failed
};

struct PointResult {
    std::vector<CellResult> cells;           // one per resolved method
    std::vector<std::uint64_t> graph_seeds;  // per replicate
    std::vector<double> realized_density;    // per replicate (NaN if generation failed)
    std::vector<double> realized_avg_degree;
};

struct ExperimentReport {
    ExperimentSpec spec;
    MetricKind metric = MetricKind::MislabelRate;
    std::vector<Method> methods;
    std::vector<PointResult> points;
    double runtime_seconds = 0.0;
};

struct Summary {
    double mean = 0.0;
    double se = 0.0;
    int count = 0;
};

/// Mean and sample-sd / sqrt(count) over the finite entries.
Summary summarize(const std::vector<double>& values);

std::uint64_t graph_seed(const ExperimentSpec& spec, std::size_t point, int replicate);
std::uint64_t method_seed(const ExperimentSpec& spec, std::size_t point, int replicate, Method method);

struct TruthGraph {
    Graph graph;
    Labels labels;
};

/// Network of one (point, replicate) cell, generated from its recorded seed.
TruthGraph generate_point(const ExperimentSpec& spec, std::size_t point, std::uint64_t seed);

/// Metric of one method on one replicate: mislabel rate, or 1/0 for rejected/not.
double evaluate_method(const ExperimentSpec& spec, std::size_t point, int replicate, Method method,
                       const TruthGraph& truth);

/// Regenerates and re-evaluates a single cell from its seeds.
double run_replicate(const ExperimentSpec& spec, std::size_t point, int replicate, Method method);

ExperimentReport run_experiment(const ExperimentSpec& spec);

/// Config text: an [experiment] section followed by one [point] section per
/// grid point, "key = value" lines, '#' comments.
ExperimentSpec parse_experiment_config(std::istream& in);
ExperimentSpec load_experiment_config(const std::string& path);

/// "a,b;c,d" with rows separated by ';'.
Matrix parse_matrix_rows(const std::string& s);
/// constant | beta(a,b) | powerlaw(xmin,exponent)
ThetaLaw parse_theta_law(const std::string& s);

nlohmann::ordered_json to_json(const ExperimentSpec& spec);
/// Provenance: resolved spec, seeds, per-replicate values, runtime.
nlohmann::ordered_json to_json(const ExperimentReport& report);

/// Long-format CSV: one row per (point, method).
void write_report_csv(std::ostream& out, const ExperimentReport& report);

struct RenderedTable {
    std::string csv;
    std::string text;
};

/// Fixed-column summary table (CSV and aligned text); absent or failed cells are "NA".
RenderedTable emit_table(const ExperimentReport& report, TableLayout layout);

}  // namespace blocksel
