#pragma once

#include <functional>
#include <optional>

#include "blocksel/spectral.hpp"

namespace blocksel::detail {

/// y = M x for a symmetric operator M.
using SymOperator = std::function<void(const Vector& x, Vector& y)>;

/// Lanczos with full reorthogonalization for the d eigenpairs of largest
/// magnitude. Returns nullopt if the Ritz residuals do not reach
/// tolerance * max(1, |theta_max|) within max_iters steps.
/// Output is unordered and unsigned; the caller normalizes it.
std::optional<EigenPairs> lanczos_top_magnitude(const SymOperator& op, Eigen::Index n, Eigen::Index d,
                                                double tolerance, Eigen::Index max_iters);

}  // namespace blocksel::detail
