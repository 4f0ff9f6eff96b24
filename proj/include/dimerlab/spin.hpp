#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "dimerlab/linalg.hpp"

namespace dimerlab {

/// Spin operators for one site of spin s = two_s/2, dimension d = two_s+1.
/// Basis ordering is ascending magnetization: index 0 <-> m = -s.
struct SpinOps {
  int two_s = 0;
  Dense sx, sy, sz;
  Dense parity;  ///< diagonal (-1)^(m+s); squares to identity

  int dim() const { return two_s + 1; }
  double spin() const { return 0.5 * two_s; }
};

/// Ladder-operator construction of the spin-s matrices.
inline SpinOps spin_operators(int two_s) {
  if (two_s < 1) throw std::invalid_argument("spin_operators: two_s must be >= 1");
  const int d = two_s + 1;
  const double s = 0.5 * two_s;
  Dense sp = Dense::Zero(d, d);
  Dense sz = Dense::Zero(d, d);
  Dense parity = Dense::Zero(d, d);
  for (int k = 0; k < d; ++k) {
    const double m = k - s;
    sz(k, k) = m;
    parity(k, k) = (k % 2 == 0) ? 1.0 : -1.0;  // (-1)^(m+s), m+s = k
    if (k + 1 < d) sp(k + 1, k) = std::sqrt(s * (s + 1) - m * (m + 1));
  }
  const Dense sm = sp.adjoint();
  SpinOps ops;
  ops.two_s = two_s;
  ops.sx = 0.5 * (sp + sm);
  ops.sy = Complex(0.0, -0.5) * (sp - sm);
  ops.sz = std::move(sz);
  ops.parity = std::move(parity);
  return ops;
}

/// Diagonal of the chain parity operator P_z = prod_i (-1)^(m_i + s):
/// entry for |m_1 ... m_N> is (-1)^(sum of basis digits).
inline RealVector site_parity_diagonal(int two_s, int n_sites,
                                       const NumericPolicy& policy = default_policy()) {
  const int d = two_s + 1;
  double dimf = 1.0;
  for (int i = 0; i < n_sites; ++i) dimf *= d;
  if (dimf > static_cast<double>(policy.dim_cap))
    throw DimensionCapError("site_parity_chain: dimension exceeds cap");
  const Index dim = static_cast<Index>(dimf);
  RealVector par(dim);
  for (Index idx = 0; idx < dim; ++idx) {
    Index rest = idx;
    int digit_sum = 0;
    for (int site = 0; site < n_sites; ++site) {
      digit_sum += static_cast<int>(rest % d);
      rest /= d;
    }
    par[idx] = (digit_sum % 2 == 0) ? 1.0 : -1.0;
  }
  return par;
}

/// Chain parity as a diagonal sparse matrix.
inline ComplexMatrix site_parity_chain(int two_s, int n_sites,
                                       const NumericPolicy& policy = default_policy()) {
  const RealVector diag = site_parity_diagonal(two_s, n_sites, policy);
  Sparse p(diag.size(), diag.size());
  p.reserve(Eigen::VectorXi::Constant(diag.size(), 1));
  for (Index i = 0; i < diag.size(); ++i) p.insert(i, i) = diag[i];
  p.makeCompressed();
  return ComplexMatrix(std::move(p), true);
}

/// Diagonal of the total-Sz operator on an n_sites chain.
inline RealVector total_sz_diagonal(int two_s, int n_sites) {
  const int d = two_s + 1;
  const double s = 0.5 * two_s;
  Index dim = 1;
  for (int i = 0; i < n_sites; ++i) dim *= d;
  RealVector sz(dim);
  for (Index idx = 0; idx < dim; ++idx) {
    Index rest = idx;
    double total = 0.0;
    for (int site = 0; site < n_sites; ++site) {
      total += static_cast<double>(rest % d) - s;
      rest /= d;
    }
    sz[idx] = total;
  }
  return sz;
}

/// Single-spin coherent state at angle theta from the -z axis, oriented so
/// that <Sx> = +s sin(theta): exp(+i theta Sy) |m=-s>.
inline Vector theta_aligned_state(int two_s, double theta) {
  const SpinOps ops = spin_operators(two_s);
  Eigen::SelfAdjointEigenSolver<Dense> es(ops.sy);
  Vector ket = Vector::Zero(ops.dim());
  ket[0] = 1.0;
  Vector coeff = es.eigenvectors().adjoint() * ket;
  for (Index i = 0; i < coeff.size(); ++i)
    coeff[i] *= std::exp(Complex(0.0, theta * es.eigenvalues()[i]));
  return es.eigenvectors() * coeff;
}

}  // namespace dimerlab
