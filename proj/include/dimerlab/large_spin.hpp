#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "dimerlab/linalg.hpp"
#include "dimerlab/model.hpp"
#include "dimerlab/spin.hpp"

namespace dimerlab {

/// Schmidt data of the parity-projected aligned pair states
///   |Theta_pm> ~ |theta,theta> pm |-theta,-theta>,  cos(theta) = sqrt(chi).
struct ThetaStateProps {
  double theta = 0.0;
  double p_plus = 1.0;   ///< larger Schmidt weight of Theta_+
  double p_minus = 0.5;  ///< exactly 1/2
  double n_plus = 0.0;   ///< negativity of Theta_+
  double n_minus = 0.5;  ///< exactly 1/2
  double overlap = 1.0;  ///< <-theta,-theta|theta,theta> = cos^(4s) theta
};

inline ThetaStateProps theta_state_properties(int two_s, double chi) {
  if (chi <= 0.0 || chi > 1.0)
    throw std::domain_error("theta_state_properties: requires 0 < chi <= 1");
  if (two_s < 1) throw std::invalid_argument("theta_state_properties: two_s must be >= 1");
  const double theta = std::acos(std::sqrt(chi));
  const double c2s = std::pow(std::cos(theta), two_s);      // cos^(2s)
  const double c4s = c2s * c2s;                             // cos^(4s)
  ThetaStateProps props;
  props.theta = theta;
  props.overlap = c4s;
  props.p_plus = (1.0 + c2s) * (1.0 + c2s) / (2.0 * (1.0 + c4s));
  props.p_minus = 0.5;
  props.n_plus = (1.0 - c4s) / (2.0 * (1.0 + c4s));
  props.n_minus = 0.5;
  return props;
}

/// Normalized pair states Theta_pm for tests and overlap checks.
inline std::pair<Vector, Vector> theta_pair_states(int two_s, double theta) {
  const Vector plus = theta_aligned_state(two_s, theta);
  const Vector minus = theta_aligned_state(two_s, -theta);
  const Index d = plus.size();
  Vector u(d * d), v(d * d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) {
      u[i * d + j] = plus[i] * plus[j];
      v[i * d + j] = minus[i] * minus[j];
    }
  Vector tp = u + v, tm = u - v;
  tp.normalize();
  tm.normalize();
  return {tp, tm};
}

/// Bosonic RPA negativity and pair entropy for the anisotropic pair
/// (chi < 1). Branches at B_c = Jx s.
struct RpaResult {
  double n12 = 0.0;
  double s2 = 0.0;
  double occupation = 0.0;  ///< mean bosonic occupation f
};

inline RpaResult rpa_negativity_entropy(const ModelParams& p) {
  if (p.chi >= 1.0)
    throw std::domain_error("rpa_negativity_entropy: requires chi < 1");
  if (p.b < 0.0) throw std::domain_error("rpa_negativity_entropy: requires B >= 0");
  const double bc = p.jx * p.spin();
  const double babs = std::abs(p.b);
  const double ratio = babs / bc;
  double w_plus, w_minus, lambda;
  if (babs < bc) {
    w_plus = bc * std::sqrt((1.0 + ratio * ratio) * (1.0 + p.chi));
    w_minus = bc * std::sqrt((1.0 - ratio * ratio) * (1.0 - p.chi));
    lambda = bc;
  } else {
    w_plus = bc * std::sqrt((ratio + 1.0) * (ratio + p.chi));
    w_minus = bc * std::sqrt((ratio - 1.0) * (ratio - p.chi));
    lambda = babs;
  }
  const double prod = w_plus * w_minus;
  if (prod <= 0.0)
    throw std::domain_error("rpa_negativity_entropy: bosonic frequencies outside validity");
  const double w_mid = 0.5 * (w_plus + w_minus);
  const double f = 0.5 * (std::sqrt(1.0 + (lambda * lambda - w_mid * w_mid) / prod) - 1.0);
  const double core = f + std::sqrt(f * (f + 1.0));
  RpaResult out;
  out.occupation = f;
  out.n12 = babs < bc ? 2.0 * core + 0.5 : core;
  const double delta = babs < bc ? 1.0 : 0.0;
  out.s2 = (f > 0.0 ? -f * std::log2(f) : 0.0) + (f + 1.0) * std::log2(f + 1.0) + delta;
  return out;
}

/// Ground state of the XX pair inside one magnetization block:
///   |psi_M> = sum_m alpha_M^m |m, M-m>,  M <= 0,
/// with coefficients sign-normalized positive.
struct XxBlockSolution {
  int m_block = 0;            ///< magnetization M
  RealVector coeffs;          ///< alpha_M^m for m = max(-s, M-s) ... min(s, M+s)
  double energy = 0.0;
  double sigma_sq = 0.0;      ///< <(Sz1 - M/2)^2>
  double r_m = 0.0;           ///< sigma_sq / s
};

namespace detail {

inline XxBlockSolution xx_block_solve(int two_s, double b, int M, double jx) {
  const double s = 0.5 * two_s;
  const int m_lo_twice = std::max(-two_s, 2 * M - two_s);  // 2*m bounds
  const int m_hi_twice = std::min(two_s, 2 * M + two_s);
  const int nb = (m_hi_twice - m_lo_twice) / 2 + 1;
  if (nb < 1) throw std::invalid_argument("xx_block_ground_state: empty block");
  RealMatrix h = RealMatrix::Zero(nb, nb);
  auto amp_up = [&](double m) { return std::sqrt(s * (s + 1) - m * (m + 1)); };
  for (int i = 0; i < nb; ++i) {
    const double m = 0.5 * (m_lo_twice + 2 * i);
    const double m2 = M - m;
    h(i, i) = b * M;
    if (i + 1 < nb) {
      // -Jx/2 (S1+ S2- + S1- S2+): |m, M-m> -> |m+1, M-m-1>
      const double t = -0.5 * jx * amp_up(m) * amp_up(m2 - 1.0);
      h(i + 1, i) = h(i, i + 1) = t;
    }
  }
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(h);
  RealVector c = es.eigenvectors().col(0);
  if (c.sum() < 0) c = -c;
  XxBlockSolution sol;
  sol.m_block = M;
  sol.energy = es.eigenvalues()[0];
  sol.coeffs = c;
  sol.sigma_sq = 0.0;
  for (int i = 0; i < nb; ++i) {
    const double m = 0.5 * (m_lo_twice + 2 * i);
    sol.sigma_sq += c[i] * c[i] * (m - 0.5 * M) * (m - 0.5 * M);
  }
  sol.r_m = sol.sigma_sq / s;
  return sol;
}

}  // namespace detail

/// XX pair ground state at fixed (or energy-optimal) magnetization. Fields
/// are given relative to B_c = Jx s; energies in units of Jx.
inline XxBlockSolution xx_block_ground_state(int two_s, double b_over_bc,
                                             std::optional<int> m_override = std::nullopt) {
  if (two_s < 1) throw std::invalid_argument("xx_block_ground_state: two_s must be >= 1");
  const double jx = 1.0;
  const double b = b_over_bc * jx * 0.5 * two_s;
  if (m_override) {
    if (*m_override < -two_s || *m_override > two_s)
      throw std::invalid_argument("xx_block_ground_state: empty block");
    return detail::xx_block_solve(two_s, b, *m_override, jx);
  }
  std::optional<XxBlockSolution> best;
  for (int M = 0; M >= -two_s; --M) {
    XxBlockSolution sol = detail::xx_block_solve(two_s, b, M, jx);
    if (!best || sol.energy < best->energy) best = std::move(sol);
  }
  return *best;
}

/// Gaussian estimate of the XX pair negativity, N ~ sqrt(2 pi sigma^2) - 1/2,
/// with the fitted gaussian coefficient profile and its overlap with the
/// exact ones.
struct GaussianNegativity {
  double n12 = 0.0;
  RealVector model_coeffs;
  double overlap = 0.0;
  bool degenerate = false;   ///< single-coefficient block, estimate meaningless
  bool gaussian_ok = false;  ///< overlap >= 0.99
};

inline GaussianNegativity gaussian_negativity(const XxBlockSolution& sol) {
  GaussianNegativity out;
  const int nb = static_cast<int>(sol.coeffs.size());
  if (nb <= 1 || sol.sigma_sq <= 0.0) {
    out.degenerate = true;
    out.model_coeffs = RealVector::Ones(std::max(nb, 1));
    out.overlap = 1.0;
    return out;
  }
  out.n12 = std::sqrt(2.0 * M_PI * sol.sigma_sq) - 0.5;
  out.model_coeffs.resize(nb);
  // coefficients live on m = M/2 + (i - (nb-1)/2) in integer steps
  for (int i = 0; i < nb; ++i) {
    const double dm = i - 0.5 * (nb - 1);
    out.model_coeffs[i] = std::exp(-dm * dm / (4.0 * sol.sigma_sq));
  }
  out.model_coeffs.normalize();
  out.overlap = std::abs(out.model_coeffs.dot(sol.coeffs));
  out.gaussian_ok = out.overlap >= 0.99;
  return out;
}

/// Pure-state negativity of a block state from its Schmidt coefficients
/// alpha_m (the Schmidt values are |alpha_m|): N = ((sum |alpha|)^2 - 1)/2.
inline double block_state_negativity(const RealVector& coeffs) {
  const double tot = coeffs.cwiseAbs().sum();
  return 0.5 * (tot * tot - 1.0);
}

}  // namespace dimerlab
