#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "dimerlab/errors.hpp"
#include "dimerlab/numeric_policy.hpp"
#include "dimerlab/types.hpp"

namespace dimerlab {

using MatVec = std::function<void(const Vector&, Vector&)>;

struct LanczosResult {
  RealVector values;  ///< ascending
  Dense vectors;      ///< orthonormal columns
};

namespace detail {

/// Deterministic start: normalized all-ones (salt > 0 adds a fixed
/// pseudo-random perturbation for restarts), orthogonalized against locked.
inline Vector lanczos_start(Index dim, const Dense& locked, int nlocked, unsigned salt) {
  Vector v = Vector::Ones(dim);
  if (salt > 0) {
    std::uint64_t state = 0x9E3779B97F4A7C15ull + salt;
    for (Index i = 0; i < dim; ++i) {
      state = state * 6364136223846793005ull + 1442695040888963407ull;
      v[i] += Complex(1e-3 * (double(state >> 11) / double(1ull << 53) - 0.5), 0.0);
    }
  }
  if (nlocked > 0)
    v.noalias() -= locked.leftCols(nlocked) * (locked.leftCols(nlocked).adjoint() * v);
  double n = v.norm();
  if (n < 1e-8) {
    std::uint64_t state = 0xDEADBEEFCAFEull + salt;
    for (Index i = 0; i < dim; ++i) {
      state = state * 6364136223846793005ull + 1442695040888963407ull;
      v[i] = Complex(double(state >> 11) / double(1ull << 53) - 0.5, 0.0);
    }
    if (nlocked > 0)
      v.noalias() -= locked.leftCols(nlocked) * (locked.leftCols(nlocked).adjoint() * v);
    n = v.norm();
  }
  return v / n;
}

}  // namespace detail

/// Restarted Lanczos with full reorthogonalization for the lowest-k
/// eigenpairs of a Hermitian operator given as a matvec. Eigenpairs are
/// found one at a time with deflation against the converged ones.
/// Convergence contract: ||Mv - lv|| < policy.eig_residual_tol, checked
/// explicitly on the returned vectors.
inline LanczosResult lanczos_lowest(const MatVec& matvec, Index dim, int k,
                                    const NumericPolicy& policy = default_policy()) {
  if (k <= 0) throw std::invalid_argument("lanczos_lowest: k must be positive");
  if (dim < k) throw std::invalid_argument("lanczos_lowest: k exceeds dimension");

  Dense locked(dim, k);
  RealVector values(k);
  int nlocked = 0;
  auto deflate = [&](Vector& v) {
    if (nlocked > 0)
      v.noalias() -= locked.leftCols(nlocked) * (locked.leftCols(nlocked).adjoint() * v);
  };

  for (int target = 0; target < k; ++target) {
    Vector start = detail::lanczos_start(dim, locked, nlocked, 0);
    double best_residual = 1e300;
    bool converged = false;

    for (int restart = 0; restart < policy.max_lanczos_restarts && !converged; ++restart) {
      const Index m = std::min<Index>(policy.max_lanczos_dim, dim - nlocked);
      Dense basis(dim, m);
      RealVector diag(m), subdiag(m);
      basis.col(0) = start;
      Vector w(dim);
      Index msz = 0;
      for (Index j = 0; j < m; ++j) {
        matvec(basis.col(j), w);
        deflate(w);
        diag[j] = std::real(basis.col(j).dot(w));
        // full reorthogonalization (subsumes the three-term recurrence)
        w.noalias() -= basis.leftCols(j + 1) * (basis.leftCols(j + 1).adjoint() * w);
        const double beta = w.norm();
        subdiag[j] = beta;
        msz = j + 1;
        if (beta < 1e-13) break;  // invariant subspace exhausted
        if (j + 1 < m) basis.col(j + 1) = w / beta;
        // cheap convergence estimate: beta * |last component of the lowest
        // tridiagonal eigenvector|
        if (msz >= 8 && (msz % 10 == 0 || j + 1 == m)) {
          Eigen::SelfAdjointEigenSolver<RealMatrix> tri;
          tri.computeFromTridiagonal(diag.head(msz), subdiag.head(msz - 1));
          const double est = beta * std::abs(tri.eigenvectors()(msz - 1, 0));
          if (est < 0.1 * policy.eig_residual_tol) break;
        }
      }
      Eigen::SelfAdjointEigenSolver<RealMatrix> tri;
      tri.computeFromTridiagonal(diag.head(msz), subdiag.head(std::max<Index>(msz - 1, 0)));
      Vector ritz = basis.leftCols(msz) * tri.eigenvectors().col(0).cast<Complex>();
      ritz.normalize();
      matvec(ritz, w);
      deflate(w);
      const double lambda = std::real(ritz.dot(w));
      const double residual = (w - lambda * ritz).norm();
      best_residual = std::min(best_residual, residual);
      if (residual < policy.eig_residual_tol) {
        values[target] = lambda;
        locked.col(nlocked++) = ritz;
        converged = true;
      } else if (msz <= 1) {
        start = detail::lanczos_start(dim, locked, nlocked, restart + 1);
      } else {
        deflate(ritz);
        const double n = ritz.norm();
        start = n < 1e-10 ? detail::lanczos_start(dim, locked, nlocked, restart + 1) : ritz / n;
      }
    }
    if (!converged)
      throw NonConvergenceError(
          "lanczos_lowest: eigenpair " + std::to_string(target) + " did not converge",
          best_residual);
  }

  std::vector<int> order(k);
  for (int i = 0; i < k; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) { return values[a] < values[b]; });
  LanczosResult out;
  out.values.resize(k);
  out.vectors.resize(dim, k);
  for (int i = 0; i < k; ++i) {
    out.values[i] = values[order[i]];
    out.vectors.col(i) = locked.col(order[i]);
  }
  return out;
}

}  // namespace dimerlab
