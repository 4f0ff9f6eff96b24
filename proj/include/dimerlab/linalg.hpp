#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "dimerlab/errors.hpp"
#include "dimerlab/lanczos.hpp"
#include "dimerlab/numeric_policy.hpp"
#include "dimerlab/types.hpp"

namespace dimerlab {

/// Square complex matrix with dense or sparse-by-coordinate storage and an
/// optional Hermitian flag. The flag is a promise made by the constructing
/// code; hermitian_eig() re-checks it numerically.
class ComplexMatrix {
 public:
  ComplexMatrix() : storage_(Dense::Zero(0, 0)) {}
  explicit ComplexMatrix(Dense m, bool hermitian = false)
      : storage_(std::move(m)), hermitian_(hermitian) {}
  explicit ComplexMatrix(Sparse m, bool hermitian = false)
      : storage_(std::move(m)), hermitian_(hermitian) {
    std::get<Sparse>(storage_).makeCompressed();
  }

  Index dim() const {
    return std::visit([](const auto& m) { return m.rows(); }, storage_);
  }
  bool is_dense() const { return std::holds_alternative<Dense>(storage_); }
  bool is_hermitian_flagged() const { return hermitian_; }

  const Dense& dense() const { return std::get<Dense>(storage_); }
  const Sparse& sparse() const { return std::get<Sparse>(storage_); }

  /// Materialize to dense storage regardless of the backing representation.
  Dense to_dense() const {
    if (is_dense()) return dense();
    return Dense(sparse());
  }

  Vector apply(const Vector& v) const {
    if (is_dense()) return dense() * v;
    return sparse() * v;
  }

  /// Max elementwise |M - M^dagger|.
  double hermiticity_defect() const {
    if (is_dense()) {
      const Dense& m = dense();
      return (m - m.adjoint()).cwiseAbs().maxCoeff();
    }
    const Sparse& s = sparse();
    Sparse diff = s - Sparse(s.adjoint());
    double defect = 0.0;
    for (int k = 0; k < diff.outerSize(); ++k)
      for (Sparse::InnerIterator it(diff, k); it; ++it)
        defect = std::max(defect, std::abs(it.value()));
    return defect;
  }

 private:
  std::variant<Dense, Sparse> storage_;
  bool hermitian_ = false;
};

/// Trace-one positive-semidefinite Hermitian matrix together with the
/// ordered subsystem dimensions whose product equals the matrix dimension.
struct DensityMatrix {
  ComplexMatrix rho;
  std::vector<Index> dims;

  Index dim() const { return rho.dim(); }

  void validate(const NumericPolicy& policy = default_policy()) const {
    Index prod = 1;
    for (Index d : dims) prod *= d;
    if (prod != rho.dim())
      throw std::invalid_argument("DensityMatrix: dims product != matrix dimension");
    const Dense m = rho.to_dense();
    if (std::abs(m.trace() - Complex(1.0, 0.0)) > policy.trace_tol)
      throw std::invalid_argument("DensityMatrix: trace deviates from 1");
    if ((m - m.adjoint()).cwiseAbs().maxCoeff() > 10 * policy.assembly_tol)
      throw std::invalid_argument("DensityMatrix: not Hermitian");
    Eigen::SelfAdjointEigenSolver<Dense> es(m, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -policy.psd_slack)
      throw std::invalid_argument("DensityMatrix: negative eigenvalue beyond tolerance");
  }
};

inline DensityMatrix pure_density_matrix(const Vector& psi, std::vector<Index> dims) {
  Dense rho = psi * psi.adjoint();
  return DensityMatrix{ComplexMatrix(std::move(rho), true), std::move(dims)};
}

/// Kronecker product. Hermitian flag survives when both factors carry it.
inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b,
                          const NumericPolicy& policy = default_policy()) {
  const std::size_t target = static_cast<std::size_t>(a.dim()) * static_cast<std::size_t>(b.dim());
  if (target > policy.dim_cap)
    throw DimensionCapError("kron: requested dimension " + std::to_string(target) +
                            " exceeds cap " + std::to_string(policy.dim_cap));
  const bool herm = a.is_hermitian_flagged() && b.is_hermitian_flagged();
  if (a.is_dense() && b.is_dense()) {
    const Dense& A = a.dense();
    const Dense& B = b.dense();
    Dense out(A.rows() * B.rows(), A.cols() * B.cols());
    for (Index i = 0; i < A.rows(); ++i)
      for (Index j = 0; j < A.cols(); ++j)
        out.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    return ComplexMatrix(std::move(out), herm);
  }
  const Sparse A = a.is_dense() ? Sparse(a.dense().sparseView()) : a.sparse();
  const Sparse B = b.is_dense() ? Sparse(b.dense().sparseView()) : b.sparse();
  std::vector<Eigen::Triplet<Complex>> trips;
  trips.reserve(static_cast<std::size_t>(A.nonZeros()) * static_cast<std::size_t>(B.nonZeros()));
  for (int ka = 0; ka < A.outerSize(); ++ka)
    for (Sparse::InnerIterator ita(A, ka); ita; ++ita)
      for (int kb = 0; kb < B.outerSize(); ++kb)
        for (Sparse::InnerIterator itb(B, kb); itb; ++itb)
          trips.emplace_back(ita.row() * B.rows() + itb.row(),
                             ita.col() * B.cols() + itb.col(), ita.value() * itb.value());
  Sparse out(A.rows() * B.rows(), A.cols() * B.cols());
  out.setFromTriplets(trips.begin(), trips.end());
  return ComplexMatrix(std::move(out), herm);
}

inline ComplexMatrix identity_matrix(Index d) {
  return ComplexMatrix(Dense(Dense::Identity(d, d)), true);
}

struct EigResult {
  RealVector values;  ///< ascending
  Dense vectors;      ///< orthonormal columns, phase-fixed
};

/// Fix the global phase of each column: largest-magnitude entry real positive.
inline void fix_eigenvector_phases(Dense& vectors) {
  for (Index c = 0; c < vectors.cols(); ++c) {
    Index imax = 0;
    double amax = -1.0;
    for (Index r = 0; r < vectors.rows(); ++r) {
      const double a = std::abs(vectors(r, c));
      if (a > amax) {
        amax = a;
        imax = r;
      }
    }
    if (amax > 0) {
      const Complex z = vectors(imax, c) / amax;
      vectors.col(c) *= std::conj(z);
    }
  }
}

namespace detail {
inline Dense materialize_checked(const ComplexMatrix& m, const NumericPolicy& policy) {
  Dense d = m.to_dense();
  if (d.rows() != d.cols()) throw std::invalid_argument("hermitian_eig: non-square input");
  const double scale = std::max(1.0, d.size() ? d.cwiseAbs().maxCoeff() : 0.0);
  if ((d - d.adjoint()).cwiseAbs().maxCoeff() > 10 * policy.assembly_tol * scale)
    throw std::invalid_argument("hermitian_eig: input is not Hermitian");
  return d;
}
}  // namespace detail

/// Full (dense) or lowest-k (iterative when the input is sparse) Hermitian
/// eigendecomposition. Ascending eigenvalues, orthonormal vectors,
/// deterministic phases. The iterative path honors the residual contract
/// ||Mv - lv|| < policy.eig_residual_tol.
inline EigResult hermitian_eig(const ComplexMatrix& m, std::optional<int> k = std::nullopt,
                               const NumericPolicy& policy = default_policy()) {
  if (k && !m.is_dense()) {
    const Sparse& s = m.sparse();
    if (s.rows() != s.cols()) throw std::invalid_argument("hermitian_eig: non-square input");
    if (m.hermiticity_defect() > 10 * policy.assembly_tol)
      throw std::invalid_argument("hermitian_eig: input is not Hermitian");
    auto matvec = [&s](const Vector& x, Vector& y) { y.noalias() = s * x; };
    LanczosResult lr = lanczos_lowest(matvec, s.rows(), *k, policy);
    EigResult res{std::move(lr.values), std::move(lr.vectors)};
    fix_eigenvector_phases(res.vectors);
    return res;
  }
  if (static_cast<std::size_t>(m.dim()) > policy.dense_cap)
    throw DimensionCapError("hermitian_eig: dense path dimension " + std::to_string(m.dim()) +
                            " exceeds cap");
  const Dense d = detail::materialize_checked(m, policy);
  Eigen::SelfAdjointEigenSolver<Dense> es(d);
  if (es.info() != Eigen::Success)
    throw NonConvergenceError("hermitian_eig: dense solver failed", 0.0);
  EigResult res{es.eigenvalues(), es.eigenvectors()};
  if (k && *k < res.values.size()) {
    res.values = res.values.head(*k).eval();
    res.vectors = res.vectors.leftCols(*k).eval();
  }
  fix_eigenvector_phases(res.vectors);
  return res;
}

/// Trace out every subsystem not listed in `keep` (indices into state.dims).
/// Kept subsystems stay in their original relative order.
inline DensityMatrix partial_trace(const DensityMatrix& state, const std::vector<int>& keep) {
  const std::size_t nsub = state.dims.size();
  if (keep.empty()) throw std::invalid_argument("partial_trace: keep set empty");
  std::vector<bool> kept(nsub, false);
  for (int idx : keep) {
    if (idx < 0 || static_cast<std::size_t>(idx) >= nsub || kept[idx])
      throw std::invalid_argument("partial_trace: invalid keep index");
    kept[idx] = true;
  }
  std::vector<Index> stride(nsub, 1);
  for (std::size_t i = nsub; i-- > 1;) stride[i - 1] = stride[i] * state.dims[i];

  std::vector<Index> kept_dims, kept_strides, traced_dims, traced_strides;
  for (std::size_t i = 0; i < nsub; ++i) {
    if (kept[i]) {
      kept_dims.push_back(state.dims[i]);
      kept_strides.push_back(stride[i]);
    } else {
      traced_dims.push_back(state.dims[i]);
      traced_strides.push_back(stride[i]);
    }
  }
  Index dk = 1, dt = 1;
  for (Index d : kept_dims) dk *= d;
  for (Index d : traced_dims) dt *= d;

  // linear index -> offset in the full kron ordering (last subsystem fastest)
  auto offset = [](Index linear, const std::vector<Index>& dims,
                   const std::vector<Index>& strides) {
    Index off = 0;
    for (std::size_t i = dims.size(); i-- > 0;) {
      off += (linear % dims[i]) * strides[i];
      linear /= dims[i];
    }
    return off;
  };
  std::vector<Index> kept_offsets(dk), traced_offsets(dt);
  for (Index i = 0; i < dk; ++i) kept_offsets[i] = offset(i, kept_dims, kept_strides);
  for (Index t = 0; t < dt; ++t) traced_offsets[t] = offset(t, traced_dims, traced_strides);

  const Dense full = state.rho.to_dense();
  Dense out = Dense::Zero(dk, dk);
  for (Index i = 0; i < dk; ++i)
    for (Index j = 0; j < dk; ++j) {
      Complex acc = 0;
      for (Index t = 0; t < dt; ++t)
        acc += full(kept_offsets[i] + traced_offsets[t], kept_offsets[j] + traced_offsets[t]);
      out(i, j) = acc;
    }
  return DensityMatrix{ComplexMatrix(std::move(out), true), kept_dims};
}

/// Transpose one side of a bipartite density matrix. Involution; preserves
/// trace and Hermiticity.
inline ComplexMatrix partial_transpose(const DensityMatrix& state, int which) {
  if (state.dims.size() != 2)
    throw std::invalid_argument("partial_transpose: state must be bipartite");
  if (which != 0 && which != 1)
    throw std::invalid_argument("partial_transpose: subsystem index must be 0 or 1");
  const Index da = state.dims[0], db = state.dims[1];
  const Dense in = state.rho.to_dense();
  Dense out(da * db, da * db);
  for (Index i1 = 0; i1 < da; ++i1)
    for (Index i2 = 0; i2 < db; ++i2)
      for (Index j1 = 0; j1 < da; ++j1)
        for (Index j2 = 0; j2 < db; ++j2) {
          if (which == 0)
            out(j1 * db + i2, i1 * db + j2) = in(i1 * db + i2, j1 * db + j2);
          else
            out(i1 * db + j2, j1 * db + i2) = in(i1 * db + i2, j1 * db + j2);
        }
  return ComplexMatrix(std::move(out), true);
}

}  // namespace dimerlab
