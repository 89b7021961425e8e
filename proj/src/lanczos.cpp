#include "lanczos.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "blocksel/rng.hpp"

namespace blocksel::detail {

namespace {

constexpr std::uint64_t kStartSeed = 0x1a2c3e5f7b9d0e21ULL;

Vector random_unit(Rng& rng, Eigen::Index n) {
    std::normal_distribution<double> g(0.0, 1.0);
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = g(rng);
    return v / v.norm();
}

// Indices of the d largest-|value| entries, ascending-value order for ties.
std::vector<Eigen::Index> top_by_magnitude(const Vector& values, Eigen::Index d) {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(values.size()));
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return std::abs(values[a]) > std::abs(values[b]); });
    idx.resize(static_cast<std::size_t>(d));
    return idx;
}

}  // namespace

std::optional<EigenPairs> lanczos_top_magnitude(const SymOperator& op, Eigen::Index n, Eigen::Index d,
                                                double tolerance, Eigen::Index max_iters) {
    const Eigen::Index cap = std::min(n, std::max(max_iters, d));
    // Do not trust a convergence check before the Krylov space has had a
    // chance to see past the first few extreme values.
    const Eigen::Index min_iters = std::min(n, 2 * d + 20);

    Rng rng(kStartSeed);
    Matrix basis(n, cap);
    std::vector<double> alpha, beta;
    alpha.reserve(static_cast<std::size_t>(cap));
    beta.reserve(static_cast<std::size_t>(cap));

    basis.col(0) = random_unit(rng, n);
    Vector w(n);
    double scale = 0.0;

    for (Eigen::Index j = 0; j < cap; ++j) {
        op(basis.col(j), w);
        const double a = basis.col(j).dot(w);
        alpha.push_back(a);
        w -= a * basis.col(j);
        if (j > 0) w -= beta.back() * basis.col(j - 1);
        for (int pass = 0; pass < 2; ++pass) {
            Vector h = basis.leftCols(j + 1).transpose() * w;
            w -= basis.leftCols(j + 1) * h;
        }
        double b = w.norm();
        scale = std::max(scale, std::abs(a) + b);
        const Eigen::Index m = j + 1;
        const bool breakdown = b <= 1e-12 * std::max(1.0, scale);

        const bool check = m >= min_iters && (m % 5 == 0 || m == cap || breakdown);
        if (check || m == n) {
            Vector diag = Eigen::Map<const Vector>(alpha.data(), m);
            Vector sub = m > 1 ? Vector(Eigen::Map<const Vector>(beta.data(), m - 1)) : Vector(0);
            Eigen::SelfAdjointEigenSolver<Matrix> tri;
            tri.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
            if (tri.info() != Eigen::Success) return std::nullopt;
            const Vector& theta = tri.eigenvalues();
            auto sel = top_by_magnitude(theta, d);
            const double ref = std::max(1.0, std::abs(theta[sel.front()]));
            bool converged = true;
            for (Eigen::Index s : sel) {
                if (std::abs(b * tri.eigenvectors()(m - 1, s)) > tolerance * ref) {
                    converged = false;
                    break;
                }
            }
            // On breakdown the residuals are exact zeros but only describe the
            // invariant subspace found so far; keep going unless it is all of R^n.
            if ((converged && !breakdown) || m == n) {
                EigenPairs out;
                out.values.resize(d);
                out.vectors.resize(n, d);
                for (Eigen::Index k = 0; k < d; ++k) {
                    out.values[k] = theta[sel[static_cast<std::size_t>(k)]];
                    out.vectors.col(k) = basis.leftCols(m) * tri.eigenvectors().col(sel[static_cast<std::size_t>(k)]);
                }
                return out;
            }
        }
        if (m == cap) break;

        if (breakdown) {
            // Restart with a fresh direction orthogonal to the current basis.
            Vector v = random_unit(rng, n);
            for (int pass = 0; pass < 2; ++pass) v -= basis.leftCols(m) * (basis.leftCols(m).transpose() * v);
            const double nv = v.norm();
            if (nv < 1e-10) return std::nullopt;
            beta.push_back(0.0);
            basis.col(m) = v / nv;
        } else {
            beta.push_back(b);
            basis.col(m) = w / b;
        }
    }
    return std::nullopt;
}

}  // namespace blocksel::detail
