#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <iosfwd>

#include "blocksel/graph.hpp"

namespace blocksel {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

enum class EmbeddingSource { Adjacency, Laplacian };

/// n x d latent positions (rows) with the d retained eigenvalues sorted by
/// decreasing magnitude. Rows are raw eigenvector rows, not scaled by |lambda|^(1/2).
struct Embedding {
    Matrix rows;
    Vector eigenvalues;
    EmbeddingSource source = EmbeddingSource::Adjacency;

    Eigen::Index dim() const noexcept { return rows.cols(); }
    Eigen::Index size() const noexcept { return rows.rows(); }
};

struct EigenPairs {
    Vector values;   // length d, |values| non-increasing
    Matrix vectors;  // n x d, orthonormal columns
};

enum class EigenSolverKind { Auto, Dense, Lanczos };

struct EigenOptions {
    EigenSolverKind solver = EigenSolverKind::Auto;
    /// Auto uses the dense solver up to this size and Lanczos above it.
    Eigen::Index dense_threshold = 400;
    /// Ritz residual tolerance relative to max(1, |lambda_max|).
    double tolerance = 1e-8;
};

/// The d eigenpairs of largest |eigenvalue|. Ties in magnitude keep the
/// solver's ascending order; each vector's largest-|entry| is made nonnegative.
/// Throws std::invalid_argument if d > n or the input is not symmetric.
EigenPairs top_eigenpairs(const Matrix& m, Eigen::Index d, const EigenOptions& options = {});
EigenPairs top_eigenpairs(const SparseMatrix& m, Eigen::Index d, const EigenOptions& options = {});

SparseMatrix adjacency_matrix(const Graph& g);
Matrix dense_adjacency(const Graph& g);

/// D^{-1/2} A D^{-1/2}; rows and columns of isolated nodes are zero.
SparseMatrix normalized_adjacency(const Graph& g);

/// Adjacency spectral embedding into R^d.
Embedding ase(const Graph& g, Eigen::Index d, const EigenOptions& options = {});

/// Embedding from D^{-1/2} A D^{-1/2}. With regularize, every nonzero row is
/// scaled to unit norm.
Embedding laplacian_embedding(const Graph& g, Eigen::Index d, bool regularize, const EigenOptions& options = {});

/// Header "d1,...,dd", then the eigenvalue line, then one line per row, all
/// with 17 significant digits.
void write_embedding_csv(std::ostream& out, const Embedding& emb);

}  // namespace blocksel
