#include <algorithm>
#include <stdexcept>

#include "cluster_internal.hpp"

namespace blocksel {

namespace detail {

std::vector<std::vector<Eigen::Index>> members_by_cluster(const Labels& labels, int K) {
    std::vector<std::vector<Eigen::Index>> members(static_cast<std::size_t>(K));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 1 || labels[i] > K) throw std::invalid_argument("label out of range");
        members[static_cast<std::size_t>(labels[i] - 1)].push_back(static_cast<Eigen::Index>(i));
    }
    return members;
}

Matrix cluster_basis(const Matrix& points, const std::vector<Eigen::Index>& members, int r) {
    const Eigen::Index d = points.cols();
    const Eigen::Index nk = static_cast<Eigen::Index>(members.size());
    const Eigen::Index rank = std::min<Eigen::Index>({r, nk, d});
    if (rank == 0) return Matrix(d, 0);
    if (rank == d) return Matrix::Identity(d, d);

    Matrix m(d, nk);
    for (Eigen::Index c = 0; c < nk; ++c) m.col(c) = points.row(members[static_cast<std::size_t>(c)]).transpose();
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU);
    return svd.matrixU().leftCols(rank);
}

double projection_residual(const Eigen::Ref<const Vector>& u, const Matrix& basis) {
    if (basis.cols() == u.size()) return 0.0;
    const double total = u.squaredNorm();
    if (basis.cols() == 0) return total;
    return std::max(0.0, total - (basis.transpose() * u).squaredNorm());
}

void check_cluster_request(const Matrix& points, int K, int n_restarts) {
    if (K < 1) throw std::invalid_argument("K must be positive");
    if (K > points.rows()) throw std::invalid_argument("K exceeds the number of points");
    if (n_restarts < 1) throw std::invalid_argument("need at least one restart");
}

}  // namespace detail

double q1_value(const Labels& labels, const Matrix& points) {
    if (static_cast<Eigen::Index>(labels.size()) != points.rows())
        throw std::invalid_argument("labels length does not match number of points");
    const int K = label_count(labels);
    auto members = detail::members_by_cluster(labels, K);
    double total = 0.0;
    for (const auto& mem : members) {
        if (mem.empty()) continue;
        Vector mean = Vector::Zero(points.cols());
        for (auto i : mem) mean += points.row(i).transpose();
        mean /= static_cast<double>(mem.size());
        for (auto i : mem) total += (points.row(i).transpose() - mean).squaredNorm();
    }
    return total;
}

double q_subspace_value(const Labels& labels, const Matrix& points, int r) {
    if (static_cast<Eigen::Index>(labels.size()) != points.rows())
        throw std::invalid_argument("labels length does not match number of points");
    if (r < 1) throw std::invalid_argument("rank must be positive");
    const int K = label_count(labels);
    auto members = detail::members_by_cluster(labels, K);
    double total = 0.0;
    for (const auto& mem : members) {
        if (mem.empty()) continue;
        Matrix basis = detail::cluster_basis(points, mem, r);
        if (basis.cols() == points.cols() || basis.cols() == static_cast<Eigen::Index>(mem.size())) continue;
        double frob = 0.0, captured = 0.0;
        for (auto i : mem) {
            frob += points.row(i).squaredNorm();
            captured += (basis.transpose() * points.row(i).transpose()).squaredNorm();
        }
        total += std::max(0.0, frob - captured);
    }
    return total;
}

}  // namespace blocksel
