#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "blocksel/graph.hpp"
#include "blocksel/spectral.hpp"

namespace blocksel {

/// Community labels, one per node, values in [1..K].
using Labels = std::vector<int>;

enum class Model { SBM, DCBM, PABM };

std::string to_string(Model m);
Model parse_model(const std::string& s);

/// P_ij = omega(tau_i, tau_j).
struct SbmParams {
    int K = 0;
    Matrix omega;
    Labels labels;
};

/// P_ij = theta_i omega(tau_i, tau_j) theta_j with max theta = 1 inside every block.
struct DcbmParams {
    int K = 0;
    Matrix omega;
    Vector theta;
    Labels labels;
    bool clamp = false;  // P_ij = min(1, ...); omega may then exceed 1
};

/// P_ij = lambda(i, tau_j) lambda(j, tau_i).
struct PabmParams {
    int K = 0;
    Matrix lambda;  // n x K
    Labels labels;
};

using ModelParams = std::variant<SbmParams, DcbmParams, PabmParams>;

/// Symmetric n x n edge-probability matrix in [0,1] with a zero diagonal.
struct ProbMatrix {
    Matrix p;

    Eigen::Index size() const noexcept { return p.rows(); }
    /// Maximum expected degree, max_i sum_j P_ij.
    double max_expected_degree() const;
    /// sum_{i<j} P_ij / (n(n-1)/2).
    double expected_density() const;
};

/// Checks the type invariants; throws std::invalid_argument on violation.
void validate(const SbmParams& params);
void validate(const DcbmParams& params);
void validate(const PabmParams& params);

/// Rescales theta so that its maximum inside each block is 1, pushing the
/// factor into omega so that P is unchanged.
DcbmParams normalize_theta(DcbmParams params);

ProbMatrix prob_matrix(const SbmParams& params);
ProbMatrix prob_matrix(const DcbmParams& params);
ProbMatrix prob_matrix(const PabmParams& params);
ProbMatrix prob_matrix(const ModelParams& params);

/// Independent Bernoulli(P_ij) edges for i < j.
Graph sample_graph(const ProbMatrix& p, std::uint64_t seed);

/// Expected density or expected average degree the generators scale to.
struct SparsityTarget {
    enum class Kind { None, Density, AvgDegree };
    Kind kind = Kind::None;
    double value = 0.0;

    static SparsityTarget none() { return {}; }
    static SparsityTarget density(double v) { return {Kind::Density, v}; }
    static SparsityTarget avg_degree(double v) { return {Kind::AvgDegree, v}; }
};

struct ThetaLaw {
    enum class Kind { Constant, Beta, PowerLaw };
    Kind kind = Kind::Constant;
    double a = 1.0;  // Beta: a, PowerLaw: xmin
    double b = 1.0;  // Beta: b, PowerLaw: density exponent

    static ThetaLaw constant() { return {}; }
    static ThetaLaw beta(double a, double b) { return {Kind::Beta, a, b}; }
    static ThetaLaw power_law(double xmin, double exponent) { return {Kind::PowerLaw, xmin, exponent}; }
};

/// (1 - beta) I + beta 11^T.
Matrix homophily_omega(int K, double beta);

/// Contiguous block labels with sizes from fractions (largest-remainder rounding).
Labels block_labels(int n, const std::vector<double>& fractions);

template <typename Params>
struct Generated {
    Graph graph;
    Params params;
};

/// Omega = c * base_omega with c chosen so the expected density (or average
/// degree) hits the target; no target keeps base_omega as is.
/// Throws InfeasibleError if a scaled entry exceeds 1.
Generated<SbmParams> gen_sbm(int n, const std::vector<double>& fractions, const Matrix& base_omega,
                             SparsityTarget target, std::uint64_t seed);

/// With clamp, an unreachable target is met by capping P at 1 instead: the
/// scale is re-solved so the capped expected density hits the target.
Generated<DcbmParams> gen_dcbm(int n, const std::vector<double>& fractions, const Matrix& base_omega,
                               ThetaLaw theta_law, SparsityTarget target, std::uint64_t seed, bool clamp = false);

/// Equal blocks; lambda(i, l) ~ Beta(diag) when l is i's block, Beta(offdiag)
/// otherwise. A density target multiplies lambda by sqrt(s).
Generated<PabmParams> gen_pabm(int n, int K, std::optional<double> target_density, std::uint64_t seed,
                               ThetaLaw diag_law = ThetaLaw::beta(2, 1), ThetaLaw offdiag_law = ThetaLaw::beta(1, 2));

/// Block-level plug-in estimate (omega for the SBM fit, O for the degree-corrected fit).
struct SbmFit {
    Matrix omega;
    ProbMatrix p;
    int singleton_blocks = 0;  // blocks of size 1, whose diagonal is set to 0
};

struct DcbmFit {
    Vector theta;
    Matrix block_degree;  // endpoint counts between blocks
    ProbMatrix p;
};

/// Omega_kl = edges between blocks / available pairs.
SbmFit fit_sbm(const Graph& g, const Labels& labels);

/// Degree-ratio plug-in: theta_i = deg_i / block degree sum, P clamped to [0,1].
/// Throws InfeasibleError if a block has zero total degree.
DcbmFit fit_dcbm(const Graph& g, const Labels& labels);

/// Plain-text provenance record: key/value lines and named matrix blocks.
void write_params(std::ostream& out, const ModelParams& params);
ModelParams read_params(std::istream& in);

/// CSV with 17 significant digits.
void write_matrix_csv(std::ostream& out, const Matrix& m);

/// Number of communities implied by labels (max label); throws on labels < 1.
int label_count(const Labels& labels);

}  // namespace blocksel
