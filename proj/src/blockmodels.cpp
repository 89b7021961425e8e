#include "blocksel/blockmodels.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "blocksel/error.hpp"
#include "blocksel/rng.hpp"

namespace blocksel {

namespace {

constexpr double kTol = 1e-12;

void check_labels(const Labels& labels, int K, std::size_t n) {
    if (labels.size() != n) throw std::invalid_argument("labels length does not match node count");
    std::vector<int> count(static_cast<std::size_t>(K), 0);
    for (int l : labels) {
        if (l < 1 || l > K) throw std::invalid_argument("label out of range [1..K]");
        ++count[static_cast<std::size_t>(l - 1)];
    }
    for (int c : count)
        if (c == 0) throw std::invalid_argument("empty community");
}

void check_omega(const Matrix& omega, int K, bool allow_above_one = false) {
    if (omega.rows() != K || omega.cols() != K) throw std::invalid_argument("omega must be K x K");
    if ((omega - omega.transpose()).cwiseAbs().maxCoeff() > kTol) throw std::invalid_argument("omega not symmetric");
    if (omega.minCoeff() < 0.0) throw std::invalid_argument("omega entries must be nonnegative");
    if (!allow_above_one && omega.maxCoeff() > 1.0) throw std::invalid_argument("omega entries outside [0,1]");
}

std::vector<double> block_sizes(const Labels& labels, int K) {
    std::vector<double> sizes(static_cast<std::size_t>(K), 0.0);
    for (int l : labels) sizes[static_cast<std::size_t>(l - 1)] += 1.0;
    return sizes;
}

double draw(Rng& rng, const ThetaLaw& law) {
    switch (law.kind) {
        case ThetaLaw::Kind::Constant: return law.a;
        case ThetaLaw::Kind::Beta: return sample_beta(rng, law.a, law.b);
        case ThetaLaw::Kind::PowerLaw: return sample_power_law(rng, law.a, law.b);
    }
    return 1.0;
}

// sum_{i<j} base(tau_i, tau_j) w_i w_j computed from per-block sums.
double weighted_pair_sum(const Matrix& base, const Labels& labels, const Vector& w, int K) {
    Vector s = Vector::Zero(K), q = Vector::Zero(K);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const auto k = labels[i] - 1;
        s[k] += w[static_cast<Eigen::Index>(i)];
        q[k] += w[static_cast<Eigen::Index>(i)] * w[static_cast<Eigen::Index>(i)];
    }
    double total = 0.0;
    for (int k = 0; k < K; ++k) {
        total += base(k, k) * 0.5 * (s[k] * s[k] - q[k]);
        for (int l = k + 1; l < K; ++l) total += base(k, l) * s[k] * s[l];
    }
    return total;
}

double solve_scale(double pair_sum, int n, SparsityTarget target) {
    const double pairs = 0.5 * n * (n - 1.0);
    double wanted = 0.0;
    switch (target.kind) {
        case SparsityTarget::Kind::None: return 1.0;
        case SparsityTarget::Kind::Density: wanted = target.value * pairs; break;
        case SparsityTarget::Kind::AvgDegree: wanted = target.value * n / 2.0; break;
    }
    if (target.value < 0.0) throw std::invalid_argument("sparsity target must be nonnegative");
    if (pair_sum <= 0.0) {
        if (wanted == 0.0) return 1.0;
        throw InfeasibleError("sparsity target unreachable: base matrix yields no edges");
    }
    return wanted / pair_sum;
}

// Scale c with sum_{i<j} min(1, c base(tau_i,tau_j) theta_i theta_j) on target,
// found by bisection; the clamped sum is nondecreasing in c.
double solve_clamped_scale(const Matrix& base, const Labels& labels, const Vector& theta, int n, SparsityTarget target,
                           double lower) {
    if (target.kind == SparsityTarget::Kind::None) return lower;
    const double wanted = target.kind == SparsityTarget::Kind::Density ? target.value * 0.5 * n * (n - 1.0)
                                                                       : target.value * n / 2.0;
    auto clamped_sum = [&](double c) {
        double total = 0.0;
        for (int j = 1; j < n; ++j) {
            const int tj = labels[static_cast<std::size_t>(j)] - 1;
            for (int i = 0; i < j; ++i)
                total += std::min(1.0, c * base(labels[static_cast<std::size_t>(i)] - 1, tj) * theta[i] * theta[j]);
        }
        return total;
    };
    double hi = lower;
    for (int it = 0; clamped_sum(hi) < wanted; ++it) {
        if (it == 60) throw InfeasibleError("sparsity target exceeds the number of available pairs");
        hi *= 2.0;
    }
    double lo = lower;
    for (int it = 0; it < 100 && hi - lo > 1e-13 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (clamped_sum(mid) < wanted ? lo : hi) = mid;
    }
    return hi;
}

void check_fractions(int n, const std::vector<double>& fractions) {
    if (n < 1) throw std::invalid_argument("n must be positive");
    if (fractions.empty()) throw std::invalid_argument("block fractions are empty");
    double sum = 0.0;
    for (double f : fractions) {
        if (f <= 0.0) throw std::invalid_argument("block fractions must be positive");
        sum += f;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("block fractions must sum to 1");
}

}  // namespace

std::string to_string(Model m) {
    switch (m) {
        case Model::SBM: return "SBM";
        case Model::DCBM: return "DCBM";
        case Model::PABM: return "PABM";
    }
    return "?";
}

Model parse_model(const std::string& s) {
    std::string t;
    for (char c : s) t.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (t == "sbm") return Model::SBM;
    if (t == "dcbm") return Model::DCBM;
    if (t == "pabm") return Model::PABM;
    throw std::invalid_argument("unknown model '" + s + "'");
}

int label_count(const Labels& labels) {
    int K = 0;
    for (int l : labels) {
        if (l < 1) throw std::invalid_argument("labels must be >= 1");
        K = std::max(K, l);
    }
    return K;
}

double ProbMatrix::max_expected_degree() const { return p.size() ? p.rowwise().sum().maxCoeff() : 0.0; }

double ProbMatrix::expected_density() const {
    const double n = static_cast<double>(p.rows());
    if (p.rows() < 2) return 0.0;
    return p.sum() / (n * (n - 1.0));
}

void validate(const SbmParams& params) {
    check_omega(params.omega, params.K);
    check_labels(params.labels, params.K, params.labels.size());
}

void validate(const DcbmParams& params) {
    check_omega(params.omega, params.K, params.clamp);
    check_labels(params.labels, params.K, static_cast<std::size_t>(params.theta.size()));
    if (params.theta.size() && params.theta.minCoeff() < 0.0) throw std::invalid_argument("theta must be nonnegative");
    std::vector<double> block_max(static_cast<std::size_t>(params.K), 0.0);
    for (std::size_t i = 0; i < params.labels.size(); ++i) {
        auto& m = block_max[static_cast<std::size_t>(params.labels[i] - 1)];
        m = std::max(m, params.theta[static_cast<Eigen::Index>(i)]);
    }
    for (double m : block_max)
        if (std::abs(m - 1.0) > kTol) throw std::invalid_argument("theta must have maximum 1 in every block");
}

void validate(const PabmParams& params) {
    if (params.lambda.cols() != params.K) throw std::invalid_argument("lambda must be n x K");
    check_labels(params.labels, params.K, static_cast<std::size_t>(params.lambda.rows()));
    if (params.lambda.size() && (params.lambda.minCoeff() < 0.0 || params.lambda.maxCoeff() > 1.0))
        throw std::invalid_argument("lambda entries outside [0,1]");
}

DcbmParams normalize_theta(DcbmParams params) {
    if (params.theta.size() != static_cast<Eigen::Index>(params.labels.size()))
        throw std::invalid_argument("theta length does not match labels");
    Vector block_max = Vector::Zero(params.K);
    for (std::size_t i = 0; i < params.labels.size(); ++i) {
        auto k = params.labels[i] - 1;
        block_max[k] = std::max(block_max[k], params.theta[static_cast<Eigen::Index>(i)]);
    }
    for (int k = 0; k < params.K; ++k)
        if (block_max[k] <= 0.0) throw std::invalid_argument("theta is zero on an entire block");
    for (std::size_t i = 0; i < params.labels.size(); ++i)
        params.theta[static_cast<Eigen::Index>(i)] /= block_max[params.labels[i] - 1];
    for (int k = 0; k < params.K; ++k)
        for (int l = 0; l < params.K; ++l) params.omega(k, l) *= block_max[k] * block_max[l];
    return params;
}

ProbMatrix prob_matrix(const SbmParams& params) {
    validate(params);
    const auto n = static_cast<Eigen::Index>(params.labels.size());
    ProbMatrix out{Matrix(n, n)};
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i)
            out.p(i, j) = i == j ? 0.0 : params.omega(params.labels[static_cast<std::size_t>(i)] - 1,
                                                      params.labels[static_cast<std::size_t>(j)] - 1);
    return out;
}

ProbMatrix prob_matrix(const DcbmParams& params) {
    validate(params);
    const auto n = static_cast<Eigen::Index>(params.labels.size());
    ProbMatrix out{Matrix(n, n)};
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i)
            out.p(i, j) = i == j ? 0.0
                                 : params.theta[i] *
                                       params.omega(params.labels[static_cast<std::size_t>(i)] - 1,
                                                    params.labels[static_cast<std::size_t>(j)] - 1) *
                                       params.theta[j];
    if (params.clamp) out.p = out.p.cwiseMin(1.0);
    return out;
}

ProbMatrix prob_matrix(const PabmParams& params) {
    validate(params);
    const auto n = static_cast<Eigen::Index>(params.labels.size());
    ProbMatrix out{Matrix(n, n)};
    for (Eigen::Index j = 0; j < n; ++j) {
        const int tj = params.labels[static_cast<std::size_t>(j)] - 1;
        for (Eigen::Index i = 0; i < n; ++i) {
            const int ti = params.labels[static_cast<std::size_t>(i)] - 1;
            out.p(i, j) = i == j ? 0.0 : params.lambda(i, tj) * params.lambda(j, ti);
        }
    }
    return out;
}

ProbMatrix prob_matrix(const ModelParams& params) {
    return std::visit([](const auto& p) { return prob_matrix(p); }, params);
}

Graph sample_graph(const ProbMatrix& p, std::uint64_t seed) {
    const Eigen::Index n = p.size();
    Rng rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<Edge> edges;
    for (Eigen::Index j = 1; j < n; ++j)
        for (Eigen::Index i = 0; i < j; ++i)
            if (unif(rng) < p.p(i, j)) edges.push_back({static_cast<node_t>(i), static_cast<node_t>(j)});
    return Graph(static_cast<std::size_t>(n), std::move(edges));
}

Matrix homophily_omega(int K, double beta) {
    if (K < 1) throw std::invalid_argument("K must be positive");
    Matrix m = Matrix::Constant(K, K, beta);
    m.diagonal().setConstant(1.0);
    return m;
}

Labels block_labels(int n, const std::vector<double>& fractions) {
    check_fractions(n, fractions);
    const auto K = fractions.size();
    std::vector<int> sizes(K);
    std::vector<std::pair<double, std::size_t>> remainders;
    int assigned = 0;
    for (std::size_t k = 0; k < K; ++k) {
        const double exact = fractions[k] * n;
        sizes[k] = static_cast<int>(std::floor(exact));
        assigned += sizes[k];
        remainders.emplace_back(exact - sizes[k], k);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (int r = 0; r < n - assigned; ++r) ++sizes[remainders[static_cast<std::size_t>(r)].second];
    Labels labels;
    labels.reserve(static_cast<std::size_t>(n));
    for (std::size_t k = 0; k < K; ++k) {
        if (sizes[k] == 0) throw std::invalid_argument("a block fraction rounds to an empty block");
        labels.insert(labels.end(), static_cast<std::size_t>(sizes[k]), static_cast<int>(k + 1));
    }
    return labels;
}

Generated<SbmParams> gen_sbm(int n, const std::vector<double>& fractions, const Matrix& base_omega,
                             SparsityTarget target, std::uint64_t seed) {
    const int K = static_cast<int>(fractions.size());
    if (base_omega.rows() != K || base_omega.cols() != K) throw std::invalid_argument("base omega must be K x K");
    if (base_omega.minCoeff() < 0.0) throw std::invalid_argument("base omega must be nonnegative");
    SbmParams params{K, Matrix(), block_labels(n, fractions)};
    const double c = solve_scale(weighted_pair_sum(base_omega, params.labels, Vector::Ones(n), K), n, target);
    params.omega = c * base_omega;
    if (params.omega.maxCoeff() > 1.0 + kTol)
        throw InfeasibleError("sparsity target requires block probabilities above 1");
    params.omega = params.omega.cwiseMin(1.0);
    Graph g = sample_graph(prob_matrix(params), seed);
    return {std::move(g), std::move(params)};
}

Generated<DcbmParams> gen_dcbm(int n, const std::vector<double>& fractions, const Matrix& base_omega,
                               ThetaLaw theta_law, SparsityTarget target, std::uint64_t seed, bool clamp) {
    const int K = static_cast<int>(fractions.size());
    if (base_omega.rows() != K || base_omega.cols() != K) throw std::invalid_argument("base omega must be K x K");
    if (base_omega.minCoeff() < 0.0) throw std::invalid_argument("base omega must be nonnegative");
    Labels labels = block_labels(n, fractions);

    Rng rng(derive_seed(seed, {1}));
    Vector theta(n);
    for (int i = 0; i < n; ++i) theta[i] = draw(rng, theta_law);

    // Scale against the raw draws, P = c theta_i base theta_j, then move the
    // per-block maxima into omega. Normalizing first would tilt P between blocks.
    double c = solve_scale(weighted_pair_sum(base_omega, labels, theta, K), n, target);
    DcbmParams params = normalize_theta(DcbmParams{K, c * base_omega, theta, labels});
    if (params.omega.maxCoeff() > 1.0 + kTol) {
        if (!clamp) throw InfeasibleError("sparsity target requires block probabilities above 1");
        c = solve_clamped_scale(base_omega, labels, theta, n, target, c);
        params = normalize_theta(DcbmParams{K, c * base_omega, std::move(theta), std::move(labels)});
        params.clamp = true;
    } else {
        params.omega = params.omega.cwiseMin(1.0);
    }
    Graph g = sample_graph(prob_matrix(params), derive_seed(seed, {2}));
    return {std::move(g), std::move(params)};
}

Generated<PabmParams> gen_pabm(int n, int K, std::optional<double> target_density, std::uint64_t seed,
                               ThetaLaw diag_law, ThetaLaw offdiag_law) {
    if (K < 1 || n < 1) throw std::invalid_argument("n and K must be positive");
    if (n % K != 0) throw std::invalid_argument("PABM generator needs n divisible by K");
    PabmParams params{K, Matrix(n, K), block_labels(n, std::vector<double>(static_cast<std::size_t>(K), 1.0 / K))};

    Rng rng(derive_seed(seed, {1}));
    for (int i = 0; i < n; ++i)
        for (int l = 0; l < K; ++l)
            params.lambda(i, l) = draw(rng, params.labels[static_cast<std::size_t>(i)] - 1 == l ? diag_law : offdiag_law);

    if (target_density) {
        const double current = prob_matrix(params).expected_density();
        if (current <= 0.0) throw InfeasibleError("PABM has no edges to scale");
        const double s = *target_density / current;
        params.lambda *= std::sqrt(s);
        if (params.lambda.maxCoeff() > 1.0 + kTol)
            throw InfeasibleError("density target requires popularity entries above 1");
        params.lambda = params.lambda.cwiseMin(1.0);
    }
    Graph g = sample_graph(prob_matrix(params), derive_seed(seed, {2}));
    return {std::move(g), std::move(params)};
}

SbmFit fit_sbm(const Graph& g, const Labels& labels) {
    const int K = label_count(labels);
    check_labels(labels, K, g.num_nodes());
    auto sizes = block_sizes(labels, K);

    Matrix edges = Matrix::Zero(K, K);
    for (const Edge& e : g.edges()) {
        const int a = labels[e.u] - 1, b = labels[e.v] - 1;
        edges(a, b) += 1.0;
        if (a != b) edges(b, a) += 1.0;
    }
    SbmFit fit{Matrix::Zero(K, K), {}, 0};
    for (int k = 0; k < K; ++k) {
        for (int l = 0; l < K; ++l) {
            const double pairs = k == l ? sizes[static_cast<std::size_t>(k)] * (sizes[static_cast<std::size_t>(k)] - 1) / 2.0
                                        : sizes[static_cast<std::size_t>(k)] * sizes[static_cast<std::size_t>(l)];
            if (pairs > 0.0) fit.omega(k, l) = edges(k, l) / pairs;
        }
        if (sizes[static_cast<std::size_t>(k)] == 1.0) ++fit.singleton_blocks;
    }
    fit.p = prob_matrix(SbmParams{K, fit.omega, labels});
    return fit;
}

DcbmFit fit_dcbm(const Graph& g, const Labels& labels) {
    const int K = label_count(labels);
    check_labels(labels, K, g.num_nodes());
    const auto n = static_cast<Eigen::Index>(g.num_nodes());

    DcbmFit fit{Vector::Zero(n), Matrix::Zero(K, K), {}};
    Vector block_deg = Vector::Zero(K);
    for (Eigen::Index i = 0; i < n; ++i)
        block_deg[labels[static_cast<std::size_t>(i)] - 1] += static_cast<double>(g.degree(static_cast<node_t>(i)));
    for (int k = 0; k < K; ++k)
        if (block_deg[k] <= 0.0)
            throw InfeasibleError("degree-corrected fit: community " + std::to_string(k + 1) +
                                  " has zero total degree; merge it or skip the test");
    for (Eigen::Index i = 0; i < n; ++i)
        fit.theta[i] = static_cast<double>(g.degree(static_cast<node_t>(i))) / block_deg[labels[static_cast<std::size_t>(i)] - 1];
    for (const Edge& e : g.edges()) {
        const int a = labels[e.u] - 1, b = labels[e.v] - 1;
        if (a == b) {
            fit.block_degree(a, a) += 2.0;
        } else {
            fit.block_degree(a, b) += 1.0;
            fit.block_degree(b, a) += 1.0;
        }
    }
    fit.p.p.resize(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i)
            fit.p.p(i, j) = i == j ? 0.0
                                   : std::min(1.0, fit.theta[i] * fit.theta[j] *
                                                       fit.block_degree(labels[static_cast<std::size_t>(i)] - 1,
                                                                        labels[static_cast<std::size_t>(j)] - 1));
    return fit;
}

}  // namespace blocksel
