#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dimerlab/entanglement.hpp"
#include "dimerlab/linalg.hpp"
#include "dimerlab/model.hpp"
#include "dimerlab/pair_model.hpp"
#include "dimerlab/spin.hpp"

namespace dimerlab {

enum class Phase { DimerizedEven, DimerizedOdd, ParityBreaking };

inline const char* phase_name(Phase p) {
  switch (p) {
    case Phase::DimerizedEven: return "dimerized-even";
    case Phase::DimerizedOdd: return "dimerized-odd";
    case Phase::ParityBreaking: return "parity-breaking";
  }
  return "?";
}

/// Converged self-consistent pair mean-field solution. The order parameter
/// is gauge-fixed to sx >= 0.
struct MfSolution {
  double sx = 0.0;
  Vector pair_state;
  double energy_per_pair = 0.0;  ///< E_0 + alpha Jx <Sx>^2
  Phase phase = Phase::DimerizedEven;
  bool converged = false;
  int iterations = 0;
};

struct MfOptions {
  double eta = 0.5;  ///< damping, halved on sign-alternating residual
  double tol = 1e-10;
  int max_iters = 5000;
};

namespace detail {

struct PairWork {
  Dense h0;     // mf_sx = 0 pair Hamiltonian
  Dense sx1;    // Sx (x) 1
  Dense sx_t;   // Sx (x) 1 + 1 (x) Sx
  Dense parity; // pair parity
};

inline PairWork make_pair_work(const ModelParams& p) {
  const SpinOps ops = spin_operators(p.two_s);
  const int d = ops.dim();
  const Dense id = Dense::Identity(d, d);
  auto kron2 = [d](const Dense& a, const Dense& b) {
    Dense out(d * d, d * d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) out.block(i * d, j * d, d, d) = a(i, j) * b;
    return out;
  };
  PairWork w;
  w.h0 = build_pair_hamiltonian(p, 0.0).dense();
  w.sx1 = kron2(ops.sx, id);
  w.sx_t = w.sx1 + kron2(id, ops.sx);
  w.parity = kron2(ops.parity, ops.parity);
  return w;
}

}  // namespace detail

/// Damped fixed-point iteration of the pair self-consistency condition
///   sx_{k+1} = <psi0(sx_k)| Sx1 |psi0(sx_k)>,
/// run from every seed; among the converged candidates the lowest
/// energy-per-pair wins, with ties broken toward the symmetry-preserving
/// sx = 0 branch.
inline MfSolution solve_self_consistent(const ModelParams& p, std::vector<double> seeds = {},
                                        const MfOptions& opts = MfOptions{},
                                        const NumericPolicy& policy = default_policy()) {
  p.validate();
  const double s = p.spin();
  if (seeds.empty()) {
    const double ct = std::min(1.0, p.b / p.b_c_mf());
    seeds = {0.0, 0.5 * s, s * std::sqrt(std::max(0.0, 1.0 - ct * ct))};
  }
  const detail::PairWork w = detail::make_pair_work(p);

  std::optional<MfSolution> best;
  double best_residual = 1e300;
  for (double seed : seeds) {
    double x = seed;
    double eta = opts.eta;
    double prev_res = 0.0;
    bool converged = false;
    int it = 0;
    Vector psi;
    for (; it < opts.max_iters; ++it) {
      const Dense h = w.h0 - (p.alpha * p.jx * x) * w.sx_t;
      Eigen::SelfAdjointEigenSolver<Dense> es(h);
      psi = es.eigenvectors().col(0);
      const double x_new = std::real(Complex(psi.dot(w.sx1 * psi)));
      const double res = x_new - x;
      if (it > 0 && res * prev_res < 0.0) eta = std::max(0.5 * eta, 1.0 / 64.0);
      prev_res = res;
      const double x_next = (1.0 - eta) * x + eta * x_new;
      if (std::abs(x_next - x) < opts.tol) {
        x = x_next;
        converged = true;
        break;
      }
      x = x_next;
    }
    if (!converged) {
      best_residual = std::min(best_residual, std::abs(prev_res));
      continue;
    }
    const Dense h = w.h0 - (p.alpha * p.jx * x) * w.sx_t;
    Eigen::SelfAdjointEigenSolver<Dense> es(h);
    psi = es.eigenvectors().col(0);
    MfSolution cand;
    cand.sx = std::real(Complex(psi.dot(w.sx1 * psi)));
    cand.pair_state = psi;
    cand.energy_per_pair = es.eigenvalues()[0] + p.alpha * p.jx * cand.sx * cand.sx;
    cand.converged = true;
    cand.iterations = it;
    // gauge: order parameter non-negative; the mirror state is P|psi>
    if (cand.sx < 0.0) {
      cand.sx = -cand.sx;
      cand.pair_state = (w.parity * cand.pair_state).eval();
    }
    const bool better =
        !best || cand.energy_per_pair < best->energy_per_pair - 1e-10 * p.jx ||
        (std::abs(cand.energy_per_pair - best->energy_per_pair) <= 1e-10 * p.jx &&
         cand.sx < best->sx);
    if (better) best = std::move(cand);
  }
  if (!best)
    throw NonConvergenceError("solve_self_consistent: no seed converged at b = " +
                                  std::to_string(p.b),
                              best_residual);
  MfSolution sol = *best;
  if (sol.sx < policy.phase_threshold) {
    const double par = std::real(Complex(sol.pair_state.dot(w.parity * sol.pair_state)));
    sol.phase = par >= 0.0 ? Phase::DimerizedEven : Phase::DimerizedOdd;
  } else {
    sol.phase = Phase::ParityBreaking;
  }
  return sol;
}

/// Critical inter-pair coupling from the full second-order sum
///   alpha_c = 1 / (Jx sum_{k>0} |<psi_k|Sx1+Sx2|psi_0>|^2 / (E_k - E_0))
/// over the mf_sx = 0 pair spectrum. Returns 0 when the pair gap closes.
inline double critical_alpha(const ModelParams& p, double b,
                             const NumericPolicy& policy = default_policy()) {
  ModelParams q = p;
  q.b = b;
  const detail::PairWork w = detail::make_pair_work(q);
  Eigen::SelfAdjointEigenSolver<Dense> es(w.h0);
  const RealVector& e = es.eigenvalues();
  if (e[1] - e[0] < policy.degeneracy_tol * p.jx) return 0.0;  // gapless: threshold vanishes
  const Vector ground = es.eigenvectors().col(0);
  const Vector sx_ground = w.sx_t * ground;
  double sum = 0.0;
  for (Index k = 1; k < e.size(); ++k) {
    const double me = std::abs(Complex(es.eigenvectors().col(k).dot(sx_ground)));
    sum += me * me / (e[k] - e[0]);
  }
  if (sum <= 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / (p.jx * sum);
}

/// Closed-form alpha_c at zero field for s = 1.
inline double critical_alpha_spin1_closed_form(double chi) {
  const double c2 = chi * chi;
  return (1.0 + c2) * (std::sqrt(1.0 + c2) * (4.0 + c2) - 4.0 - 3.0 * c2) / (c2 * c2);
}

/// Conventional single-spin mean field: <Sx> = s sin(theta) with
/// cos(theta) = B / B_c^mf below the critical field, zero above.
inline double conventional_mf(const ModelParams& p) {
  const double ct = p.b / p.b_c_mf();
  if (ct >= 1.0) return 0.0;
  return p.spin() * std::sqrt(1.0 - ct * ct);
}

/// Energy per pair of the conventional mean-field product state.
inline double conventional_mf_energy_per_pair(const ModelParams& p) {
  const double s = p.spin(), bc = p.b_c_mf();
  if (p.b >= bc) return -2.0 * p.b * s;
  const double beta = p.b / bc;
  return -s * bc * (1.0 + beta * beta);
}

/// Reduced pair state of the parity-restored mean field. In the
/// parity-breaking phase the restored chain state
///   |Psi_pm> ~ prod_i |psi+> pm prod_i |psi->,  |psi-> = P|psi+>,
/// reduces to
///   rho12 = [ |psi+><psi+| + |psi-><psi-| + sg o^{n-1} (|psi+><psi-| + h.c.) ]
///           / (2 (1 + sg o^n)),   o = <psi-|psi+>,
/// where sg = sign(o^n) selects the branch that stays normalizable. The
/// default discards the complementary o^{n-1} overlap term, which leaves the
/// rank-2 state with eigenvalues (1 pm |o|)/2; keep_complementary retains it
/// (relevant for short chains, where o^{n-1} is not small).
inline DensityMatrix parity_restored_rho12(const MfSolution& sol, int n_pairs,
                                           bool keep_complementary = false) {
  const Index dim = sol.pair_state.size();
  const int d = static_cast<int>(std::lround(std::sqrt(double(dim))));
  if (Index(d) * d != dim)
    throw std::invalid_argument("parity_restored_rho12: state is not a pair state");
  if (sol.phase != Phase::ParityBreaking)
    return pure_density_matrix(sol.pair_state, {d, d});

  const RealVector parity = pair_parity_diagonal(d - 1);
  Vector psi_minus(dim);
  for (Index i = 0; i < dim; ++i) psi_minus[i] = parity[i] * sol.pair_state[i];
  const double o = std::real(Complex(psi_minus.dot(sol.pair_state)));

  Dense rho = 0.5 * (sol.pair_state * sol.pair_state.adjoint() +
                     psi_minus * psi_minus.adjoint());
  if (keep_complementary && n_pairs >= 1 && o != 0.0) {
    const double sg = (n_pairs % 2 == 0) ? 1.0 : (o >= 0.0 ? 1.0 : -1.0);
    const double cross = sg * std::pow(o, n_pairs - 1);
    const double norm = 2.0 * (1.0 + sg * std::pow(o, n_pairs));
    rho = (sol.pair_state * sol.pair_state.adjoint() + psi_minus * psi_minus.adjoint() +
           cross * (sol.pair_state * psi_minus.adjoint() + psi_minus * sol.pair_state.adjoint())) /
          norm;
  }
  return DensityMatrix{ComplexMatrix(std::move(rho), true), {d, d}};
}

/// Phase diagram over an (alpha, b) grid: per cell, the self-consistent
/// solution and its classification; per field, the critical coupling.
struct PhaseDiagram {
  std::vector<double> alpha_grid, b_grid;
  std::vector<std::vector<Phase>> phase;   ///< [alpha][b]
  std::vector<std::vector<double>> sx;     ///< [alpha][b]
  std::vector<std::vector<bool>> failed;   ///< cells whose solver did not converge
  std::vector<double> alpha_c_curve;       ///< per b
};

inline PhaseDiagram phase_diagram(const ModelParams& p, const std::vector<double>& alpha_grid,
                                  const std::vector<double>& b_grid,
                                  const NumericPolicy& policy = default_policy()) {
  for (std::size_t i = 1; i < alpha_grid.size(); ++i)
    if (alpha_grid[i] <= alpha_grid[i - 1])
      throw std::invalid_argument("phase_diagram: alpha grid must ascend");
  for (std::size_t i = 1; i < b_grid.size(); ++i)
    if (b_grid[i] <= b_grid[i - 1])
      throw std::invalid_argument("phase_diagram: b grid must ascend");

  PhaseDiagram out;
  out.alpha_grid = alpha_grid;
  out.b_grid = b_grid;
  out.phase.assign(alpha_grid.size(), std::vector<Phase>(b_grid.size(), Phase::DimerizedEven));
  out.sx.assign(alpha_grid.size(), std::vector<double>(b_grid.size(), 0.0));
  out.failed.assign(alpha_grid.size(), std::vector<bool>(b_grid.size(), false));
  out.alpha_c_curve.resize(b_grid.size());

  for (std::size_t j = 0; j < b_grid.size(); ++j)
    out.alpha_c_curve[j] = critical_alpha(p, b_grid[j], policy);

  for (std::size_t i = 0; i < alpha_grid.size(); ++i) {
    for (std::size_t j = 0; j < b_grid.size(); ++j) {
      ModelParams q = p;
      q.alpha = alpha_grid[i];
      q.b = b_grid[j];
      try {
        const MfSolution sol = solve_self_consistent(q, {}, MfOptions{}, policy);
        out.phase[i][j] = sol.phase;
        out.sx[i][j] = sol.phase == Phase::ParityBreaking ? sol.sx : 0.0;
      } catch (const NonConvergenceError&) {
        out.failed[i][j] = true;
      }
    }
  }
  return out;
}

}  // namespace dimerlab
