#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dimerlab/entanglement.hpp"
#include "dimerlab/lanczos.hpp"
#include "dimerlab/linalg.hpp"
#include "dimerlab/meanfield.hpp"
#include "dimerlab/model.hpp"
#include "dimerlab/parallel.hpp"
#include "dimerlab/spin.hpp"

namespace dimerlab {

/// Sparse Hamiltonian of the full 2n-site chain, split into the field-free
/// bond part and the total-Sz diagonal so field scans reuse the assembly.
/// Site 0 owns the most significant basis digit.
struct ChainOperator {
  ModelParams params;
  Index dim = 0;
  Sparse h0;               ///< bond terms (field-independent)
  RealVector sz_diag;      ///< diagonal of sum_i Sz_i
  RealVector parity_mask;  ///< +-1 per basis state

  Sparse hamiltonian() const { return hamiltonian_at(params.b); }
  Sparse hamiltonian_at(double b) const {
    Sparse h = h0;
    Sparse diag(dim, dim);
    diag.reserve(Eigen::VectorXi::Constant(dim, 1));
    for (Index i = 0; i < dim; ++i) diag.insert(i, i) = b * sz_diag[i];
    diag.makeCompressed();
    return Sparse(h + diag);
  }
};

inline ChainOperator build_chain_hamiltonian(const ModelParams& p,
                                             const NumericPolicy& policy = default_policy()) {
  p.validate();
  const int N = p.n_sites();
  const int d = p.site_dim();
  const double s = p.spin();
  double dimf = 1.0;
  for (int i = 0; i < N; ++i) dimf *= d;
  if (dimf > static_cast<double>(policy.dim_cap))
    throw DimensionCapError("build_chain_hamiltonian: dimension " + std::to_string(dimf) +
                            " exceeds cap " + std::to_string(policy.dim_cap));
  const Index dim = static_cast<Index>(dimf);

  // ladder amplitudes indexed by the source digit
  std::vector<double> up(d, 0.0), down(d, 0.0);
  for (int k = 0; k < d; ++k) {
    const double m = k - s;
    if (k + 1 < d) up[k] = std::sqrt(s * (s + 1) - m * (m + 1));
    if (k > 0) down[k] = std::sqrt(s * (s + 1) - m * (m - 1));
  }
  std::vector<Index> pow_d(N + 1, 1);
  for (int i = 1; i <= N; ++i) pow_d[i] = pow_d[i - 1] * d;
  auto digit = [&](Index state, int site) {
    return static_cast<int>((state / pow_d[N - 1 - site]) % d);
  };

  // bonds: (site_a, site_b, Jx weight); the inter-pair ones carry alpha
  struct Bond {
    int a, b;
    double weight;
  };
  std::vector<Bond> bonds;
  for (int pair = 0; pair < p.n_pairs; ++pair) {
    const int a = 2 * pair, b = 2 * pair + 1;
    bonds.push_back({a, b, 1.0});
    int c = b + 1;
    if (c == N) {
      if (p.boundary == Boundary::Open) continue;
      c = 0;
    }
    bonds.push_back({b, c, p.alpha});
  }

  const double flip_coeff = -(p.jx + p.jy()) / 4.0;  // S+S- + S-S+
  const double pump_coeff = -(p.jx - p.jy()) / 4.0;  // S+S+ + S-S-

  std::vector<Eigen::Triplet<Complex>> trips;
  trips.reserve(static_cast<std::size_t>(dim) * bonds.size() * 4);
  for (Index state = 0; state < dim; ++state) {
    for (const Bond& bond : bonds) {
      const int ka = digit(state, bond.a), kb = digit(state, bond.b);
      const Index sa = pow_d[N - 1 - bond.a], sb = pow_d[N - 1 - bond.b];
      // S+_a S-_b
      if (ka + 1 < d && kb > 0)
        trips.emplace_back(state + sa - sb, state,
                           bond.weight * flip_coeff * up[ka] * down[kb]);
      // S-_a S+_b
      if (ka > 0 && kb + 1 < d)
        trips.emplace_back(state - sa + sb, state,
                           bond.weight * flip_coeff * down[ka] * up[kb]);
      // S+_a S+_b
      if (ka + 1 < d && kb + 1 < d)
        trips.emplace_back(state + sa + sb, state,
                           bond.weight * pump_coeff * up[ka] * up[kb]);
      // S-_a S-_b
      if (ka > 0 && kb > 0)
        trips.emplace_back(state - sa - sb, state,
                           bond.weight * pump_coeff * down[ka] * down[kb]);
    }
  }
  ChainOperator op;
  op.params = p;
  op.dim = dim;
  op.h0.resize(dim, dim);
  op.h0.setFromTriplets(trips.begin(), trips.end());
  op.h0.makeCompressed();
  op.sz_diag = total_sz_diagonal(p.two_s, N);
  op.parity_mask = site_parity_diagonal(p.two_s, N, policy);
  return op;
}

/// Parity-block view of a ChainOperator with per-block solvers. Blocks hold
/// the field-free part and the Sz diagonal, so any field value reuses the
/// assembly.
class ChainBlocks {
 public:
  explicit ChainBlocks(const ChainOperator& op, const NumericPolicy& policy = default_policy())
      : dim_(op.dim), policy_(policy) {
    for (Index i = 0; i < op.dim; ++i) (op.parity_mask[i] > 0 ? idx_[0] : idx_[1]).push_back(i);
    std::vector<Index> pos(op.dim);
    for (int blk = 0; blk < 2; ++blk)
      for (std::size_t j = 0; j < idx_[blk].size(); ++j) pos[idx_[blk][j]] = j;
    std::vector<Eigen::Triplet<Complex>> trips[2];
    for (int k = 0; k < op.h0.outerSize(); ++k)
      for (Sparse::InnerIterator it(op.h0, k); it; ++it) {
        const int blk = op.parity_mask[it.row()] > 0 ? 0 : 1;
        // H conserves parity: row and col always in the same block
        trips[blk].emplace_back(pos[it.row()], pos[it.col()], it.value());
      }
    for (int blk = 0; blk < 2; ++blk) {
      h0_[blk].resize(idx_[blk].size(), idx_[blk].size());
      h0_[blk].setFromTriplets(trips[blk].begin(), trips[blk].end());
      h0_[blk].makeCompressed();
      sz_[blk].resize(idx_[blk].size());
      for (std::size_t j = 0; j < idx_[blk].size(); ++j) sz_[blk][j] = op.sz_diag[idx_[blk][j]];
    }
  }

  Index block_dim(int parity_sign) const { return idx_[parity_sign > 0 ? 0 : 1].size(); }

  struct BlockEigs {
    RealVector values;
    Dense vectors;  ///< block-local columns
  };

  /// Lowest-k eigenpairs of one parity block at field b.
  BlockEigs solve(int parity_sign, double b, int k, bool need_vectors = true) const {
    const int blk = parity_sign > 0 ? 0 : 1;
    const Index n = static_cast<Index>(idx_[blk].size());
    if (n <= 48 || n <= 2 * k) {
      Dense h = Dense(h0_[blk]);
      for (Index i = 0; i < n; ++i) h(i, i) += b * sz_[blk][i];
      Eigen::SelfAdjointEigenSolver<Dense> es(h);
      const int kk = std::min<Index>(k, n);
      return {es.eigenvalues().head(kk), es.eigenvectors().leftCols(kk)};
    }
    const Sparse& h0 = h0_[blk];
    const RealVector& sz = sz_[blk];
    auto matvec = [&h0, &sz, b](const Vector& x, Vector& y) {
      y.noalias() = h0 * x;
      y.array() += b * sz.array() * x.array();
    };
    LanczosResult lr = lanczos_lowest(matvec, n, k, policy_);
    (void)need_vectors;
    return {std::move(lr.values), std::move(lr.vectors)};
  }

  /// Embed a block-local vector into the full Hilbert space.
  Vector embed(int parity_sign, const Vector& block_vec) const {
    const int blk = parity_sign > 0 ? 0 : 1;
    Vector full = Vector::Zero(dim_);
    for (std::size_t j = 0; j < idx_[blk].size(); ++j) full[idx_[blk][j]] = block_vec[j];
    return full;
  }

 private:
  Index dim_;
  NumericPolicy policy_;
  std::vector<Index> idx_[2];  // [0]=even, [1]=odd
  Sparse h0_[2];
  RealVector sz_[2];
};

struct ParitySectorEigs {
  RealVector even_values, odd_values;
  Dense even_vectors, odd_vectors;  ///< full-dimension columns
  double gs_energy() const { return std::min(even_values[0], odd_values[0]); }
  int gs_parity() const { return even_values[0] <= odd_values[0] ? +1 : -1; }
};

/// Lowest-k eigenpairs in each global-parity sector.
inline ParitySectorEigs ground_states_by_parity(const ChainOperator& op, int k,
                                                const NumericPolicy& policy = default_policy()) {
  if (k < 1 || k > 8) throw std::invalid_argument("ground_states_by_parity: k must be in [1, 8]");
  ChainBlocks blocks(op, policy);
  ParitySectorEigs out;
  auto even = blocks.solve(+1, op.params.b, k);
  auto odd = blocks.solve(-1, op.params.b, k);
  out.even_values = std::move(even.values);
  out.odd_values = std::move(odd.values);
  out.even_vectors.resize(op.dim, even.vectors.cols());
  for (Index c = 0; c < even.vectors.cols(); ++c)
    out.even_vectors.col(c) = blocks.embed(+1, even.vectors.col(c));
  out.odd_vectors.resize(op.dim, odd.vectors.cols());
  for (Index c = 0; c < odd.vectors.cols(); ++c)
    out.odd_vectors.col(c) = blocks.embed(-1, odd.vectors.col(c));
  return out;
}

/// Reduced density matrix of sites (site_a, site_b) from a full chain state.
inline DensityMatrix reduced_pair_density(const Vector& psi, int two_s, int n_sites, int site_a,
                                          int site_b) {
  const int d = two_s + 1;
  if (site_a == site_b || site_a < 0 || site_b < 0 || site_a >= n_sites || site_b >= n_sites)
    throw std::invalid_argument("reduced_pair_density: invalid site pair");
  std::vector<Index> pow_d(n_sites + 1, 1);
  for (int i = 1; i <= n_sites; ++i) pow_d[i] = pow_d[i - 1] * d;
  const Index dim = pow_d[n_sites];
  if (psi.size() != dim) throw std::invalid_argument("reduced_pair_density: state size mismatch");
  // permute digits so (site_a, site_b) lead, then reduce over the rest
  Vector perm(dim);
  const Index rest_dim = dim / (d * d);
  for (Index state = 0; state < dim; ++state) {
    const int ka = static_cast<int>((state / pow_d[n_sites - 1 - site_a]) % d);
    const int kb = static_cast<int>((state / pow_d[n_sites - 1 - site_b]) % d);
    Index rest = 0;
    for (int site = 0; site < n_sites; ++site) {
      if (site == site_a || site == site_b) continue;
      rest = rest * d + (state / pow_d[n_sites - 1 - site]) % d;
    }
    perm[(Index(ka) * d + kb) * rest_dim + rest] = psi[state];
  }
  Dense rho = detail::single_side_reduction(perm, d * d, rest_dim);
  return DensityMatrix{ComplexMatrix(std::move(rho), true), {d, d}};
}

/// One field point of a chain scan, with the GMF companion values.
struct ScanRecord {
  double b = 0.0;        ///< raw field
  double b_scaled = 0.0; ///< B / (2 Jx s)
  double energy = 0.0;   ///< ground-state energy
  int gs_parity = +1;
  double gap_same_parity = 0.0;
  double gap_opposite_parity = 0.0;
  double m = 0.0;  ///< intensive magnetization <sum_i Sz_i> / (2n)
  double n12 = 0.0, s1 = 0.0, s2 = 0.0;
  double sx_gmf = 0.0, m_gmf = 0.0, n12_gmf = 0.0, s1_gmf = 0.0, s2_gmf = 0.0;
  bool gmf_parity_breaking = false;
  bool degenerate = false;  ///< left-branch convention applied at a crossing
};

/// GMF observables at one field point, evaluated with the finite-n parity
/// restored pair state (complementary overlap kept).
struct GmfObservables {
  double sx = 0.0, m = 0.0, n12 = 0.0, s1 = 0.0, s2 = 0.0;
  bool parity_breaking = false;
};

inline GmfObservables gmf_observables(const ModelParams& p,
                                      const NumericPolicy& policy = default_policy()) {
  const MfSolution sol = solve_self_consistent(p, {}, MfOptions{}, policy);
  const DensityMatrix rho12 = parity_restored_rho12(sol, p.n_pairs, /*keep_complementary=*/true);
  const SpinOps ops = spin_operators(p.two_s);
  const int d = ops.dim();
  const Dense rho = rho12.rho.to_dense();
  double m = 0.0;
  for (int k1 = 0; k1 < d; ++k1)
    for (int k2 = 0; k2 < d; ++k2) {
      const Index i = Index(k1) * d + k2;
      m += 0.5 * std::real(rho(i, i)) * ((k1 - p.spin()) + (k2 - p.spin()));
    }
  GmfObservables out;
  out.sx = sol.sx;
  out.m = m;
  out.n12 = negativity(rho12, policy);
  out.s2 = entropy(rho12);
  out.s1 = entropy(partial_trace(rho12, {0}));
  out.parity_breaking = sol.phase == Phase::ParityBreaking;
  return out;
}

/// Exact scan over an ascending field grid: ground state per parity sector,
/// pair observables of sites (0,1), and the GMF companions. Grid points are
/// solved concurrently; the left-branch convention at degenerate crossings
/// is applied in a sequential pass.
inline std::vector<ScanRecord> field_scan(const ModelParams& p, const std::vector<double>& b_grid,
                                          int threads = 1,
                                          const NumericPolicy& policy = default_policy()) {
  for (std::size_t i = 1; i < b_grid.size(); ++i)
    if (b_grid[i] <= b_grid[i - 1])
      throw std::invalid_argument("field_scan: field grid must ascend");
  ModelParams base = p;
  base.b = 0.0;
  const ChainOperator op = build_chain_hamiltonian(base, policy);
  const ChainBlocks blocks(op, policy);

  struct PointSolve {
    RealVector even_values, odd_values;
    Vector even_gs, odd_gs;  // block-local
    GmfObservables gmf;
    std::string error;
  };
  std::vector<PointSolve> solves(b_grid.size());
  parallel_for(b_grid.size(), threads, [&](std::size_t i) {
    PointSolve& ps = solves[i];
    try {
      auto even = blocks.solve(+1, b_grid[i], 2);
      auto odd = blocks.solve(-1, b_grid[i], 2);
      ps.even_values = std::move(even.values);
      ps.odd_values = std::move(odd.values);
      ps.even_gs = even.vectors.col(0);
      ps.odd_gs = odd.vectors.col(0);
      ModelParams q = p;
      q.b = b_grid[i];
      ps.gmf = gmf_observables(q, policy);
    } catch (const std::exception& e) {
      ps.error = std::string(e.what());
    }
  });
  for (std::size_t i = 0; i < b_grid.size(); ++i)
    if (!solves[i].error.empty())
      throw NonConvergenceError("field_scan: failure at b = " + std::to_string(b_grid[i]) +
                                    ": " + solves[i].error,
                                0.0);

  std::vector<ScanRecord> records(b_grid.size());
  const double deg_tol = policy.degeneracy_tol * p.jx * p.n_sites();
  int prev_parity = 0;
  for (std::size_t i = 0; i < b_grid.size(); ++i) {
    const PointSolve& ps = solves[i];
    ScanRecord& r = records[i];
    r.b = b_grid[i];
    r.b_scaled = b_grid[i] / p.jx_scale();
    const double e_even = ps.even_values[0], e_odd = ps.odd_values[0];
    int parity = e_even <= e_odd ? +1 : -1;
    if (std::abs(e_even - e_odd) < deg_tol && prev_parity != 0) {
      parity = prev_parity;  // left-approaching branch
      r.degenerate = true;
    }
    r.gs_parity = parity;
    r.energy = parity > 0 ? e_even : e_odd;
    const RealVector& same = parity > 0 ? ps.even_values : ps.odd_values;
    r.gap_same_parity = same.size() > 1 ? same[1] - same[0] : 0.0;
    r.gap_opposite_parity = (parity > 0 ? e_odd : e_even) - r.energy;
    const Vector gs = blocks.embed(parity, parity > 0 ? ps.even_gs : ps.odd_gs);
    double m = 0.0;
    for (Index j = 0; j < gs.size(); ++j) m += std::norm(gs[j]) * op.sz_diag[j];
    r.m = m / p.n_sites();
    const DensityMatrix rho12 = reduced_pair_density(gs, p.two_s, p.n_sites(), 0, 1);
    r.n12 = negativity(rho12, policy);
    r.s2 = entropy(rho12);
    r.s1 = entropy(partial_trace(rho12, {0}));
    r.sx_gmf = ps.gmf.sx;
    r.m_gmf = ps.gmf.m;
    r.n12_gmf = ps.gmf.n12;
    r.s1_gmf = ps.gmf.s1;
    r.s2_gmf = ps.gmf.s2;
    r.gmf_parity_breaking = ps.gmf.parity_breaking;
    prev_parity = parity;
  }
  return records;
}

/// Fields where the chain ground state's parity flips, bracketed on a
/// uniform grid over [b_lo, b_hi] and bisected to 1e-8 Jx.
inline std::vector<double> parity_transition_fields(const ModelParams& p, double b_lo, double b_hi,
                                                    int threads = 1, int bracket_points = 400,
                                                    const NumericPolicy& policy = default_policy()) {
  if (!(b_hi > b_lo)) throw std::invalid_argument("parity_transition_fields: empty range");
  ModelParams base = p;
  base.b = 0.0;
  const ChainOperator op = build_chain_hamiltonian(base, policy);
  const ChainBlocks blocks(op, policy);
  auto split = [&](double b) {
    const auto even = blocks.solve(+1, b, 1, false);
    const auto odd = blocks.solve(-1, b, 1, false);
    return even.values[0] - odd.values[0];
  };
  std::vector<double> f(bracket_points);
  parallel_for(bracket_points, threads, [&](std::size_t i) {
    f[i] = split(b_lo + (b_hi - b_lo) * i / (bracket_points - 1));
  });
  std::vector<std::pair<double, double>> brackets;
  for (int i = 0; i + 1 < bracket_points; ++i) {
    if ((f[i] < 0) != (f[i + 1] < 0))
      brackets.emplace_back(b_lo + (b_hi - b_lo) * i / (bracket_points - 1),
                            b_lo + (b_hi - b_lo) * (i + 1) / (bracket_points - 1));
  }
  std::vector<double> roots(brackets.size());
  parallel_for(brackets.size(), threads, [&](std::size_t i) {
    double lo = brackets[i].first, hi = brackets[i].second;
    double flo = split(lo);
    while (hi - lo > 1e-8 * p.jx) {
      const double mid = 0.5 * (lo + hi);
      const double fm = split(mid);
      if ((fm < 0) == (flo < 0)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
    }
    roots[i] = 0.5 * (lo + hi);
  });
  return roots;
}

}  // namespace dimerlab
