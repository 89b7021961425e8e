#include "blocksel/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "blocksel/error.hpp"
#include "lanczos.hpp"

namespace blocksel {

namespace {

constexpr double kSymmetryTol = 1e-10;

Eigen::Index lanczos_iteration_cap(Eigen::Index n, Eigen::Index d) {
    const double cap = 10.0 * static_cast<double>(d) * std::log(static_cast<double>(std::max<Eigen::Index>(n, 2)));
    return std::max<Eigen::Index>(static_cast<Eigen::Index>(std::ceil(cap)), 2 * d + 60);
}

void check_request(Eigen::Index rows, Eigen::Index cols, Eigen::Index d) {
    if (rows != cols) throw std::invalid_argument("top_eigenpairs: matrix is not square");
    if (d < 1) throw std::invalid_argument("top_eigenpairs: d must be positive");
    if (d > rows) throw std::invalid_argument("top_eigenpairs: d exceeds matrix size");
}

// Sort by decreasing |value| (stable with respect to the input order) and flip
// each column so that its largest-magnitude entry is nonnegative.
EigenPairs normalize(const Vector& values, const Matrix& vectors, Eigen::Index d) {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(values.size()));
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return std::abs(values[a]) > std::abs(values[b]); });

    EigenPairs out;
    out.values.resize(d);
    out.vectors.resize(vectors.rows(), d);
    for (Eigen::Index k = 0; k < d; ++k) {
        const Eigen::Index src = idx[static_cast<std::size_t>(k)];
        out.values[k] = values[src];
        out.vectors.col(k) = vectors.col(src);
        Eigen::Index arg = 0;
        out.vectors.col(k).cwiseAbs().maxCoeff(&arg);
        if (out.vectors(arg, k) < 0.0) out.vectors.col(k) *= -1.0;
    }
    return out;
}

EigenPairs dense_top(const Matrix& m, Eigen::Index d) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(m, Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success) throw NumericalError("dense symmetric eigensolver failed");
    return normalize(solver.eigenvalues(), solver.eigenvectors(), d);
}

template <typename Mat>
EigenPairs dispatch(const Mat& m, Eigen::Index d, const EigenOptions& options) {
    const Eigen::Index n = m.rows();
    const bool dense = options.solver == EigenSolverKind::Dense ||
                       (options.solver == EigenSolverKind::Auto && n <= options.dense_threshold);
    if (!dense) {
        detail::SymOperator op = [&m](const Vector& x, Vector& y) { y.noalias() = m * x; };
        auto res = detail::lanczos_top_magnitude(op, n, d, options.tolerance, lanczos_iteration_cap(n, d));
        if (res) return normalize(res->values, res->vectors, d);
        if (options.solver == EigenSolverKind::Lanczos) throw NumericalError("Lanczos did not converge");
    }
    return dense_top(Matrix(m), d);
}

}  // namespace

EigenPairs top_eigenpairs(const Matrix& m, Eigen::Index d, const EigenOptions& options) {
    check_request(m.rows(), m.cols(), d);
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol * scale)
        throw std::invalid_argument("top_eigenpairs: matrix is not symmetric");
    return dispatch(m, d, options);
}

EigenPairs top_eigenpairs(const SparseMatrix& m, Eigen::Index d, const EigenOptions& options) {
    check_request(m.rows(), m.cols(), d);
    SparseMatrix diff = m - SparseMatrix(m.transpose());
    double asym = 0.0, scale = 1.0;
    for (Eigen::Index k = 0; k < diff.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(diff, k); it; ++it) asym = std::max(asym, std::abs(it.value()));
    for (Eigen::Index k = 0; k < m.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(m, k); it; ++it) scale = std::max(scale, std::abs(it.value()));
    if (asym > kSymmetryTol * scale) throw std::invalid_argument("top_eigenpairs: matrix is not symmetric");
    return dispatch(m, d, options);
}

SparseMatrix adjacency_matrix(const Graph& g) {
    const auto n = static_cast<Eigen::Index>(g.num_nodes());
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(2 * g.num_edges());
    for (const Edge& e : g.edges()) {
        trips.emplace_back(e.u, e.v, 1.0);
        trips.emplace_back(e.v, e.u, 1.0);
    }
    SparseMatrix a(n, n);
    a.setFromTriplets(trips.begin(), trips.end());
    return a;
}

Matrix dense_adjacency(const Graph& g) {
    const auto n = static_cast<Eigen::Index>(g.num_nodes());
    Matrix a = Matrix::Zero(n, n);
    for (const Edge& e : g.edges()) {
        a(e.u, e.v) = 1.0;
        a(e.v, e.u) = 1.0;
    }
    return a;
}

SparseMatrix normalized_adjacency(const Graph& g) {
    const auto n = static_cast<Eigen::Index>(g.num_nodes());
    std::vector<double> inv_sqrt(g.num_nodes(), 0.0);
    for (std::size_t i = 0; i < g.num_nodes(); ++i) {
        const auto deg = g.degree(static_cast<node_t>(i));
        if (deg > 0) inv_sqrt[i] = 1.0 / std::sqrt(static_cast<double>(deg));
    }
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(2 * g.num_edges());
    for (const Edge& e : g.edges()) {
        const double w = inv_sqrt[e.u] * inv_sqrt[e.v];
        trips.emplace_back(e.u, e.v, w);
        trips.emplace_back(e.v, e.u, w);
    }
    SparseMatrix l(n, n);
    l.setFromTriplets(trips.begin(), trips.end());
    return l;
}

Embedding ase(const Graph& g, Eigen::Index d, const EigenOptions& options) {
    auto pairs = top_eigenpairs(adjacency_matrix(g), d, options);
    return Embedding{std::move(pairs.vectors), std::move(pairs.values), EmbeddingSource::Adjacency};
}

Embedding laplacian_embedding(const Graph& g, Eigen::Index d, bool regularize, const EigenOptions& options) {
    auto pairs = top_eigenpairs(normalized_adjacency(g), d, options);
    Embedding emb{std::move(pairs.vectors), std::move(pairs.values), EmbeddingSource::Laplacian};
    if (regularize) {
        for (Eigen::Index i = 0; i < emb.rows.rows(); ++i) {
            const double norm = emb.rows.row(i).norm();
            if (norm > 0.0) emb.rows.row(i) /= norm;
        }
    }
    return emb;
}

void write_embedding_csv(std::ostream& out, const Embedding& emb) {
    const auto old_precision = out.precision(17);
    for (Eigen::Index k = 0; k < emb.dim(); ++k) out << (k ? "," : "") << 'd' << (k + 1);
    out << '\n';
    for (Eigen::Index k = 0; k < emb.dim(); ++k) out << (k ? "," : "") << emb.eigenvalues[k];
    out << '\n';
    for (Eigen::Index i = 0; i < emb.size(); ++i) {
        for (Eigen::Index k = 0; k < emb.dim(); ++k) out << (k ? "," : "") << emb.rows(i, k);
        out << '\n';
    }
    out.precision(old_precision);
}

}  // namespace blocksel
