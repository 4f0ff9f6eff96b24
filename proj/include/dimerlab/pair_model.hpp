#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "dimerlab/linalg.hpp"
#include "dimerlab/model.hpp"
#include "dimerlab/spin.hpp"

namespace dimerlab {

/// Lowest levels of the two-site problem resolved by S_z parity.
struct PairSpectrum {
  double e_plus = 0.0;   ///< lowest energy, even-parity sector
  double e_minus = 0.0;  ///< lowest energy, odd-parity sector
  Vector psi_plus;       ///< corresponding states in the full (2s+1)^2 space
  Vector psi_minus;
  std::vector<std::pair<double, int>> full_levels;  ///< (energy, parity), ascending

  double gs_energy() const { return std::min(e_plus, e_minus); }
  int gs_parity() const { return e_plus <= e_minus ? +1 : -1; }
  const Vector& gs_state() const { return e_plus <= e_minus ? psi_plus : psi_minus; }
};

/// Mean-field pair Hamiltonian
///   h = B (Sz1 + Sz2) - Jx Sx1 Sx2 - Jy Sy1 Sy2 - alpha Jx <Sx> (Sx1 + Sx2),
/// with the <Sy> = 0 branch built in. Commutes with the pair parity iff
/// mf_sx = 0.
inline ComplexMatrix build_pair_hamiltonian(const ModelParams& p, double mf_sx) {
  p.validate();
  const SpinOps ops = spin_operators(p.two_s);
  const int d = ops.dim();
  const Dense id = Dense::Identity(d, d);
  auto kron2 = [d](const Dense& a, const Dense& b) {
    Dense out(d * d, d * d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) out.block(i * d, j * d, d, d) = a(i, j) * b;
    return out;
  };
  Dense h = p.b * (kron2(ops.sz, id) + kron2(id, ops.sz));
  h -= p.jx * kron2(ops.sx, ops.sx);
  h -= p.jy() * kron2(ops.sy, ops.sy);
  if (mf_sx != 0.0) h -= p.alpha * p.jx * mf_sx * (kron2(ops.sx, id) + kron2(id, ops.sx));
  return ComplexMatrix(std::move(h), true);
}

/// Diagonal of the two-site parity P (x) P.
inline RealVector pair_parity_diagonal(int two_s) { return site_parity_diagonal(two_s, 2); }

/// Sector-resolved spectrum via projection onto the two parity blocks.
/// Requires mf_sx = 0 (otherwise parity labels are meaningless).
inline PairSpectrum pair_spectrum_by_parity(const ModelParams& p, double mf_sx = 0.0,
                                            const NumericPolicy& policy = default_policy()) {
  if (mf_sx != 0.0)
    throw std::invalid_argument("pair_spectrum_by_parity: parity labels require mf_sx = 0");
  const Dense h = build_pair_hamiltonian(p, 0.0).dense();
  const RealVector parity = pair_parity_diagonal(p.two_s);
  const Index dim = h.rows();

  std::vector<Index> idx_even, idx_odd;
  for (Index i = 0; i < dim; ++i) (parity[i] > 0 ? idx_even : idx_odd).push_back(i);

  PairSpectrum spec;
  auto solve_block = [&](const std::vector<Index>& idx, int sign) {
    Dense block(idx.size(), idx.size());
    for (std::size_t r = 0; r < idx.size(); ++r)
      for (std::size_t c = 0; c < idx.size(); ++c) block(r, c) = h(idx[r], idx[c]);
    EigResult eig = hermitian_eig(ComplexMatrix(std::move(block), true), std::nullopt, policy);
    for (Index i = 0; i < eig.values.size(); ++i)
      spec.full_levels.emplace_back(eig.values[i], sign);
    Vector gs = Vector::Zero(dim);
    for (std::size_t r = 0; r < idx.size(); ++r) gs[idx[r]] = eig.vectors(r, 0);
    return std::make_pair(eig.values[0], gs);
  };
  auto [e_p, v_p] = solve_block(idx_even, +1);
  auto [e_m, v_m] = solve_block(idx_odd, -1);
  spec.e_plus = e_p;
  spec.e_minus = e_m;
  spec.psi_plus = std::move(v_p);
  spec.psi_minus = std::move(v_m);
  std::sort(spec.full_levels.begin(), spec.full_levels.end());
  return spec;
}

/// Closed-form spin-1 pair spectrum; independent oracle for the numeric
/// sector diagonalization. Basis index is 3*(m1+1) + (m2+1).
inline PairSpectrum spin1_analytic(const ModelParams& p) {
  if (p.two_s != 2) throw std::invalid_argument("spin1_analytic: requires two_s = 2");
  const double jx = p.jx, jy = p.jy(), b = p.b;
  const double j2 = jx * jx + jy * jy;
  const double e_plus =
      -std::sqrt(2 * b * b + 0.5 * j2 + std::sqrt(4 * b * b * (b * b - jx * jy) + 0.25 * j2 * j2));
  const double e_minus = -(0.5 * (jx + jy) + std::sqrt(b * b + 0.25 * (jx - jy) * (jx - jy)));
  const double aep = std::abs(e_plus), aem = std::abs(e_minus);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);

  Vector psi_p = Vector::Zero(9), psi_m = Vector::Zero(9);
  if (std::abs(jx - jy) > 1e-12 * jx) {
    // scale by (jx - jy) so the XX limit stays finite
    const double am = jx - jy;
    const double a0 = 2.0 * (aep - 2.0 * b);
    const double ap = (jx - jy) * (aep - 2.0 * b) / (aep + 2.0 * b);
    const double a11 = a0 * (jx + jy) / (std::sqrt(2.0) * aep);
    psi_p[0] = am;                  // |-1,-1>
    psi_p[4] = a0;                  // |0,0>
    psi_p[8] = ap;                  // |1,1>
    psi_p[2] = a11 * inv_sqrt2;     // |-1,1>
    psi_p[6] = a11 * inv_sqrt2;     // |1,-1>
    const double bm = jx - jy;
    const double bp = 2.0 * (aem - b) - (jx + jy);
    psi_m[1] = bm * inv_sqrt2;      // |-1,0>
    psi_m[3] = bm * inv_sqrt2;      // |0,-1>
    psi_m[5] = bp * inv_sqrt2;      // |0,1>
    psi_m[7] = bp * inv_sqrt2;      // |1,0>
  } else {
    // XX limit: magnetization blocks
    if (2 * b * b < jx * jx) {
      psi_p[4] = inv_sqrt2;
      psi_p[2] = 0.5;
      psi_p[6] = 0.5;
    } else {
      psi_p[0] = 1.0;
    }
    psi_m[1] = inv_sqrt2;
    psi_m[3] = inv_sqrt2;
  }
  psi_p.normalize();
  psi_m.normalize();

  PairSpectrum spec;
  spec.e_plus = e_plus;
  spec.e_minus = e_minus;
  spec.psi_plus = std::move(psi_p);
  spec.psi_minus = std::move(psi_m);
  spec.full_levels = {{e_plus, +1}, {e_minus, -1}};
  std::sort(spec.full_levels.begin(), spec.full_levels.end());
  return spec;
}

/// Factorizing field B_s = J_x s (1+alpha) sqrt(chi) and the alignment
/// angle cos(theta) = sqrt(chi).
struct FactorizingField {
  double b_s;
  double theta;
};

inline FactorizingField factorizing_field(const ModelParams& p) {
  if (p.chi <= 0.0)
    throw std::domain_error("factorizing_field: requires 0 < chi <= 1");
  return {p.jx * p.spin() * (1.0 + p.alpha) * std::sqrt(p.chi), std::acos(std::sqrt(p.chi))};
}

/// Fields where the lowest even- and odd-parity pair levels cross, for the
/// isolated pair. Bracket on a uniform 400-point grid over [0, 1.2 Jx s],
/// then bisect to 1e-10 Jx. Returns an empty list for chi <= 0 (gapped for
/// all fields). Crossings closer than the degeneracy tolerance merge.
inline std::vector<double> pair_transition_fields(const ModelParams& p,
                                                  const NumericPolicy& policy = default_policy()) {
  if (p.chi <= 0.0) return {};
  const int grid_points = 400;
  const double b_max = 1.2 * p.jx * p.spin();

  auto level_split = [&](double b) {
    ModelParams q = p;
    q.b = b;
    const PairSpectrum s = pair_spectrum_by_parity(q, 0.0, policy);
    return s.e_plus - s.e_minus;
  };

  std::vector<double> crossings;
  double prev_b = 0.0, prev_f = level_split(0.0);
  for (int i = 1; i < grid_points; ++i) {
    const double b = b_max * i / (grid_points - 1);
    const double f = level_split(b);
    if ((prev_f < 0) != (f < 0)) {
      double lo = prev_b, hi = b, flo = prev_f;
      while (hi - lo > 1e-10 * p.jx) {
        const double mid = 0.5 * (lo + hi);
        const double fm = level_split(mid);
        if ((fm < 0) == (flo < 0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      const double root = 0.5 * (lo + hi);
      if (crossings.empty() || root - crossings.back() > policy.degeneracy_tol * p.jx)
        crossings.push_back(root);
    }
    prev_b = b;
    prev_f = f;
  }
  return crossings;
}

}  // namespace dimerlab
