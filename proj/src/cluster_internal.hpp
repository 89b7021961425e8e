#pragma once

#include <vector>

#include "blocksel/cluster.hpp"
#include "blocksel/rng.hpp"

namespace blocksel::detail {

/// Member indices per cluster (0-based cluster ids).
std::vector<std::vector<Eigen::Index>> members_by_cluster(const Labels& labels, int K);

/// Orthonormal basis (d x rank) of the top rank = min(r, |members|, d) left
/// singular vectors of the d x |members| matrix of the members' points.
Matrix cluster_basis(const Matrix& points, const std::vector<Eigen::Index>& members, int r);

/// ||u||^2 - ||V^T u||^2 clamped at 0; exactly 0 when V spans R^d.
double projection_residual(const Eigen::Ref<const Vector>& u, const Matrix& basis);

void check_cluster_request(const Matrix& points, int K, int n_restarts);

}  // namespace blocksel::detail
