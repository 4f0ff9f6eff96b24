#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "dimerlab/linalg.hpp"

namespace dimerlab {

/// Negativity N = (Tr|rho^T2| - 1)/2 = -(sum of negative eigenvalues of the
/// partial transpose). Symmetric under transposing either side.
inline double negativity(const DensityMatrix& state,
                         const NumericPolicy& policy = default_policy()) {
  if (state.dims.size() != 2)
    throw std::invalid_argument("negativity: state must be bipartite");
  const ComplexMatrix pt = partial_transpose(state, 1);
  Eigen::SelfAdjointEigenSolver<Dense> es(pt.to_dense(), Eigen::EigenvaluesOnly);
  double neg = 0.0;
  for (Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double v = es.eigenvalues()[i];
    if (v < -policy.negativity_cutoff) neg -= v;
  }
  return neg;
}

/// Von Neumann entropy (base 2) over eigenvalues above 1e-14.
inline double entropy(const DensityMatrix& state) {
  Eigen::SelfAdjointEigenSolver<Dense> es(state.rho.to_dense(), Eigen::EigenvaluesOnly);
  double h = 0.0;
  for (Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double p = es.eigenvalues()[i];
    if (p > 1e-14) h -= p * std::log2(p);
  }
  return h;
}

namespace detail {
inline Dense single_side_reduction(const Vector& psi, Index da, Index db) {
  Eigen::Map<const Dense> m(psi.data(), db, da);  // column-major: psi[i*db+j] = m(j,i)
  return m.transpose() * m.conjugate();           // rho_1 = Tr_2 |psi><psi|
}

/// Schmidt values (singular values of the state matrix), descending. SVD,
/// not eigenvalues of rho_1: the square root does not amplify noise at the
/// structural zeros.
inline RealVector schmidt_values(const Vector& psi, Index da, Index db) {
  Eigen::Map<const Dense> m(psi.data(), db, da);
  Eigen::JacobiSVD<Dense> svd(m);
  return svd.singularValues();
}
}  // namespace detail

/// Pure-state negativity ((Tr sqrt(rho_1))^2 - 1)/2; equals the mixed-state
/// formula on the projector and reaches s for a maximally entangled spin-s
/// pair.
inline double pure_state_negativity(const Vector& psi, const std::vector<Index>& dims) {
  if (dims.size() != 2) throw std::invalid_argument("pure_state_negativity: need two dims");
  if (dims[0] * dims[1] != psi.size())
    throw std::invalid_argument("pure_state_negativity: dims do not match state size");
  if (std::abs(psi.norm() - 1.0) > 1e-8)
    throw std::invalid_argument("pure_state_negativity: state not normalized");
  const double tr_sqrt = detail::schmidt_values(psi, dims[0], dims[1]).sum();
  return 0.5 * (tr_sqrt * tr_sqrt - 1.0);
}

/// Eigenvalues of the single-side reduction of a bipartite pure state,
/// descending, padded with exact zeros to dims[0].
inline std::vector<double> entanglement_spectrum(const Vector& psi,
                                                 const std::vector<Index>& dims) {
  if (dims.size() != 2) throw std::invalid_argument("entanglement_spectrum: need two dims");
  if (dims[0] * dims[1] != psi.size())
    throw std::invalid_argument("entanglement_spectrum: dims do not match state size");
  const RealVector sv = detail::schmidt_values(psi, dims[0], dims[1]);
  std::vector<double> spec;
  spec.reserve(dims[0]);
  for (Index i = 0; i < sv.size(); ++i) spec.push_back(sv[i] * sv[i]);
  std::sort(spec.begin(), spec.end(), std::greater<double>());
  while (static_cast<Index>(spec.size()) < dims[0]) spec.push_back(0.0);
  return spec;
}

/// Bundle of the pair entanglement measures.
struct EntanglementReport {
  double negativity = 0.0;
  double entropy = 0.0;              ///< base-2
  std::vector<double> spectrum;      ///< descending, sums to 1
  int schmidt_rank = 0;              ///< entries above 1e-12
};

inline EntanglementReport entanglement_report(const Vector& psi, const std::vector<Index>& dims,
                                              const NumericPolicy& policy = default_policy()) {
  EntanglementReport rep;
  rep.negativity = pure_state_negativity(psi, dims);
  rep.spectrum = entanglement_spectrum(psi, dims);
  rep.entropy = 0.0;
  rep.schmidt_rank = 0;
  for (double p : rep.spectrum) {
    if (p > 1e-14) rep.entropy -= p * std::log2(p);
    if (p > policy.negativity_cutoff) ++rep.schmidt_rank;
  }
  return rep;
}

}  // namespace dimerlab
