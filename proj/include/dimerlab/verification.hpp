#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "dimerlab/chain.hpp"
#include "dimerlab/entanglement.hpp"
#include "dimerlab/large_spin.hpp"
#include "dimerlab/linalg.hpp"
#include "dimerlab/meanfield.hpp"
#include "dimerlab/model.hpp"
#include "dimerlab/pair_model.hpp"
#include "dimerlab/parallel.hpp"

namespace dimerlab {

/// One verification check: |actual - expected| <= tolerance unless the
/// criterion defines pass itself (one-sided bounds).
struct CriterionResult {
  std::string id;
  std::string description;
  double expected = 0.0;
  double actual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

namespace verify_detail {

inline CriterionResult check(std::string id, std::string description, double expected,
                             double actual, double tolerance) {
  CriterionResult r{std::move(id), std::move(description), expected, actual, tolerance, false};
  r.pass = std::abs(actual - expected) <= tolerance;
  return r;
}

inline CriterionResult check_below(std::string id, std::string description, double bound,
                                   double actual) {
  CriterionResult r{std::move(id), std::move(description), bound, actual, 0.0, actual < bound};
  return r;
}

inline CriterionResult check_at_least(std::string id, std::string description, double bound,
                                      double actual) {
  CriterionResult r{std::move(id), std::move(description), bound, actual, 0.0, actual >= bound};
  return r;
}

inline ModelParams pair_params(int two_s, double chi, double b = 0.0, double alpha = 0.0) {
  ModelParams p;
  p.two_s = two_s;
  p.chi = chi;
  p.b = b;
  p.alpha = alpha;
  p.n_pairs = 1;
  return p;
}

inline Vector pair_ground_state(int two_s, double chi, double b) {
  const PairSpectrum spec = pair_spectrum_by_parity(pair_params(two_s, chi, b));
  return spec.gs_state();
}

inline double pair_gs_negativity(int two_s, double chi, double b) {
  const Vector gs = pair_ground_state(two_s, chi, b);
  const Index d = two_s + 1;
  return negativity(pure_density_matrix(gs, {d, d}));
}

/// Printed zero-field negativity of the spin-1 pair ground state.
inline double spin1_zero_field_negativity(double chi) {
  const double a = std::abs(chi);
  const double c2 = chi * chi;
  return (1.0 + a * (1.0 + a + c2 + std::sqrt(1.0 + c2))) /
         (2.0 * std::sqrt((1.0 + c2) * (1.0 + c2) * (1.0 + c2)));
}

}  // namespace verify_detail

inline std::vector<CriterionResult> acceptance_a1_a2() {
  using namespace verify_detail;
  std::vector<CriterionResult> out;
  const double ac075 = critical_alpha(pair_params(2, 0.75), 0.0);
  out.push_back(check("A1", "alpha_c(0), s=1, chi=0.75", 0.0772, ac075, 0.001));
  out.push_back(check("A1.closed-form", "numeric sum equals spin-1 closed form", 0.0,
                      std::abs(ac075 - critical_alpha_spin1_closed_form(0.75)), 1e-8));
  out.push_back(check("A2.s1-chi1", "alpha_c(0), s=1, chi=1", 0.142,
                      critical_alpha(pair_params(2, 1.0), 0.0), 0.002));
  out.push_back(check("A2.s32-chi075", "alpha_c(0), s=3/2, chi=0.75", 0.019,
                      critical_alpha(pair_params(3, 0.75), 0.0), 0.002));
  out.push_back(check("A2.s32-chi1", "alpha_c(0), s=3/2, chi=1", 0.06,
                      critical_alpha(pair_params(3, 1.0), 0.0), 0.005));
  return out;
}

inline std::vector<CriterionResult> acceptance_a3() {
  using namespace verify_detail;
  std::vector<CriterionResult> out;
  const auto crossings = pair_transition_fields(pair_params(2, 1.0));
  out.push_back(check("A3.count", "isolated s=1 XX pair crossing count", 2.0,
                      static_cast<double>(crossings.size()), 0.0));
  if (crossings.size() == 2) {
    out.push_back(check("A3.bc1", "first crossing (sqrt(2)-1) Jx", std::sqrt(2.0) - 1.0,
                        crossings[0], 1e-8));
    out.push_back(check("A3.bs", "last crossing at Jx", 1.0, crossings[1], 1e-8));
  }
  return out;
}

inline std::vector<CriterionResult> acceptance_a4() {
  using namespace verify_detail;
  std::vector<CriterionResult> out;
  out.push_back(check("A4.chi1", "s=1 pair negativity at B=0, chi=1", 0.25 + 1.0 / std::sqrt(2.0),
                      pair_gs_negativity(2, 1.0, 0.0), 1e-9));
  out.push_back(check("A4.chi075", "s=1 pair negativity at B=0, chi=0.75 (printed formula)",
                      spin1_zero_field_negativity(0.75), pair_gs_negativity(2, 0.75, 0.0), 1e-9));
  const double window_fields[3] = {0.5, 0.65, 0.8};
  for (int i = 0; i < 3; ++i) {
    out.push_back(check("A4.psi-minus-" + std::to_string(i),
                        "Bell-type psi_- negativity at b=" + std::to_string(window_fields[i]),
                        0.5, pair_gs_negativity(2, 0.75, window_fields[i]), 1e-9));
  }
  return out;
}

inline std::vector<CriterionResult> acceptance_a5(int threads) {
  using namespace verify_detail;
  std::vector<CriterionResult> out;
  ModelParams p = pair_params(2, 0.75, 0.0, 0.05);
  p.n_pairs = 3;
  const double bs = factorizing_field(p).b_s;
  const auto transitions = parity_transition_fields(p, 0.0, 1.2 * p.jx * p.spin(), threads);
  out.push_back(check("A5.transitions", "2ns parity transitions, s=1, 2n=6", 6.0,
                      static_cast<double>(transitions.size()), 0.0));
  if (!transitions.empty())
    out.push_back(check("A5.last-field", "last transition at 1.05 sqrt(0.75) Jx", bs,
                        transitions.back(), 1e-5));
  // restored pair state at the factorizing field
  ModelParams q = p;
  q.b = bs;
  const MfSolution sol = solve_self_consistent(q);
  const DensityMatrix rho12 = parity_restored_rho12(sol, p.n_pairs);
  out.push_back(check_below("A5.n12-at-bs", "restored-pair negativity at B_s", 1e-3,
                            negativity(rho12)));
  Eigen::SelfAdjointEigenSolver<Dense> es(rho12.rho.to_dense(), Eigen::EigenvaluesOnly);
  const RealVector ev = es.eigenvalues();
  const double lam_hi = ev[ev.size() - 1], lam_lo = ev[ev.size() - 2];
  const double c4 = 0.75 * 0.75;  // cos^4(theta) = chi^2 for s=1
  const double defect = std::max(std::abs(lam_hi - 0.5 * (1 + c4)),
                                 std::abs(lam_lo - 0.5 * (1 - c4)));
  out.push_back(check("A5.rho12-eigs", "restored rho12 eigenvalues (1 +- cos^4 theta)/2", 0.0,
                      defect, 1e-3));
  return out;
}

inline std::vector<CriterionResult> acceptance_a6_a7(int threads) {
  using namespace verify_detail;
  std::vector<CriterionResult> out;
  ModelParams p = pair_params(2, 0.75, 0.0, 0.05);
  p.n_pairs = 4;  // 2n = 8
  std::vector<double> grid(60);
  for (int i = 0; i < 60; ++i) grid[i] = 0.7 * p.jx_scale() * i / 59.0;
  const auto records = field_scan(p, grid, threads);
  double dn = 0.0, dm = 0.0, s2_gmf_peak = 0.0, s2_exact_peak = 0.0;
  for (const ScanRecord& r : records) {
    dn = std::max(dn, std::abs(r.n12_gmf - r.n12));
    dm = std::max(dm, std::abs(r.m_gmf - r.m));
    if (r.gmf_parity_breaking) {
      s2_gmf_peak = std::max(s2_gmf_peak, r.s2_gmf);
      s2_exact_peak = std::max(s2_exact_peak, r.s2);
    }
  }
  out.push_back(check("A6.n12", "max |N12_GMF - N12_exact|, s=1, 2n=8", 0.0, dn, 0.07));
  out.push_back(check("A6.m", "max |m_GMF - m_exact|", 0.0, dm, 0.05));
  out.push_back(check("A6.s2-gmf-peak", "GMF S2 peak in parity-breaking windows", 1.0,
                      s2_gmf_peak, 0.05));
  out.push_back(check_at_least("A6.s2-exact-peak", "exact S2 peak in parity-breaking windows",
                               0.8, s2_exact_peak));

  // containment: alpha_c at every exact transition stays below alpha
  ModelParams p6 = p;
  p6.n_pairs = 3;
  double worst = 0.0;
  for (double b : parity_transition_fields(p6, 0.0, 1.2 * p.jx * p.spin(), threads))
    worst = std::max(worst, critical_alpha(p6, b));
  out.push_back(check_below("A7.containment-2n6", "max alpha_c at 2n=6 transitions", p.alpha,
                            worst));
  worst = 0.0;
  for (double b : parity_transition_fields(p, 0.0, 1.2 * p.jx * p.spin(), threads))
    worst = std::max(worst, critical_alpha(p, b));
  out.push_back(check_below("A7.containment-2n8", "max alpha_c at 2n=8 transitions", p.alpha,
                            worst));
  return out;
}

inline std::vector<CriterionResult> acceptance_a8() {
  using namespace verify_detail;
  std::vector<CriterionResult> out;
  std::mt19937 rng(12345);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const std::vector<std::pair<Index, Index>> shapes = {{2, 2}, {2, 3}, {3, 2}, {3, 3},
                                                       {3, 4}, {4, 3}, {4, 4}};
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto [da, db] = shapes[trial % shapes.size()];
    Vector psi(da * db);
    for (Index i = 0; i < psi.size(); ++i) psi[i] = Complex(gauss(rng), gauss(rng));
    psi.normalize();
    const double via_pt = negativity(pure_density_matrix(psi, {da, db}));
    const double via_schmidt = pure_state_negativity(psi, {da, db});
    worst = std::max(worst, std::abs(via_pt - via_schmidt));
  }
  out.push_back(check("A8.negativity-oracle", "partial-transpose vs Schmidt negativity, 50 states",
                      0.0, worst, 1e-10));

  double worst_e = 0.0, worst_o = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double b = 1.5 * i / 99.0;
    const ModelParams p = pair_params(2, 0.75, b);
    const PairSpectrum analytic = spin1_analytic(p);
    const PairSpectrum numeric = pair_spectrum_by_parity(p);
    worst_e = std::max({worst_e, std::abs(analytic.e_plus - numeric.e_plus),
                        std::abs(analytic.e_minus - numeric.e_minus)});
    worst_o = std::max({worst_o,
                        1.0 - std::abs(Complex(analytic.psi_plus.dot(numeric.psi_plus))),
                        1.0 - std::abs(Complex(analytic.psi_minus.dot(numeric.psi_minus)))});
  }
  out.push_back(check("A8.spin1-energies", "analytic vs numeric pair energies, 100-point grid",
                      0.0, worst_e, 1e-10));
  out.push_back(check("A8.spin1-overlaps", "analytic vs numeric pair states, 100-point grid", 0.0,
                      worst_o, 1e-10));
  return out;
}

inline std::vector<CriterionResult> acceptance_a9(int threads) {
  using namespace verify_detail;
  std::vector<CriterionResult> out;
  for (double alpha : {0.05, 0.5, 1.0}) {
    ModelParams p = pair_params(2, 0.75, 0.0, alpha);
    p.n_pairs = 3;
    std::vector<double> grid(30);
    for (int i = 0; i < 30; ++i) grid[i] = 0.7 * p.jx_scale() * i / 29.0;
    const ChainOperator op = build_chain_hamiltonian(p);
    const ChainBlocks blocks(op);
    std::vector<double> margins(grid.size());
    parallel_for(grid.size(), threads, [&](std::size_t i) {
      ModelParams q = p;
      q.b = grid[i];
      const double e_exact =
          std::min(blocks.solve(+1, grid[i], 1, false).values[0],
                   blocks.solve(-1, grid[i], 1, false).values[0]) /
          p.n_pairs;
      const double e_gmf = solve_self_consistent(q).energy_per_pair;
      const double e_mf = conventional_mf_energy_per_pair(q);
      margins[i] = std::max(e_exact - e_gmf, e_gmf - e_mf);
    });
    double worst = -1e300;
    for (double m : margins) worst = std::max(worst, m);
    out.push_back(check_below("A9.alpha" + std::to_string(alpha).substr(0, 4),
                              "variational ordering E_exact <= E_GMF <= E_MF", 1e-9, worst));
  }
  return out;
}

inline std::vector<CriterionResult> acceptance_a10_a11() {
  using namespace verify_detail;
  std::vector<CriterionResult> out;
  // s = 20 XX pair at zero field, M = 0 block
  const XxBlockSolution s20 = xx_block_ground_state(40, 0.0, 0);
  out.push_back(check("A10.sigma-ratio", "sigma_0^2 / s at s=20", 0.354, s20.r_m, 0.018));
  const XxBlockSolution s5 = xx_block_ground_state(10, 0.0, 0);
  out.push_back(check_at_least("A10.gaussian-overlap", "gaussian vs exact coefficients at s=5",
                               0.999, gaussian_negativity(s5).overlap));
  const double n_exact = block_state_negativity(s20.coeffs);
  const double n_gauss = gaussian_negativity(s20).n12;
  out.push_back(check_below("A10.gaussian-negativity",
                            "relative gap of sqrt(2 pi sigma^2) - 1/2 estimate at s=20", 0.05,
                            std::abs(n_gauss - n_exact) / n_exact));

  ModelParams p10 = pair_params(20, 0.75);  // s = 10
  const double n10 = pair_gs_negativity(20, 0.75, 0.0);
  const double n5 = pair_gs_negativity(10, 0.75, 0.0);
  out.push_back(check("A11.rpa", "exact pair N12 vs RPA closed form, s=10, chi=0.75, B=0",
                      rpa_negativity_entropy(p10).n12, n10, 0.05));
  out.push_back(check_below("A11.saturation", "N12(s=10) - N12(s=5) saturation bound", 0.02,
                            n10 - n5));
  return out;
}

inline std::vector<CriterionResult> acceptance_a12() {
  using namespace verify_detail;
  std::vector<CriterionResult> out;
  double dn = 0.0, ds = 0.0, dz = 0.0;
  for (int two_s : {2, 3, 4}) {
    const Index d = two_s + 1;
    const double s = 0.5 * two_s;
    Vector psi = Vector::Zero(d * d);
    for (Index k = 0; k < d; ++k) psi[k * d + (d - 1 - k)] = 1.0 / std::sqrt(double(d));
    dn = std::max(dn, std::abs(pure_state_negativity(psi, {d, d}) - s));
    const DensityMatrix rho1 = partial_trace(pure_density_matrix(psi, {d, d}), {0});
    ds = std::max(ds, std::abs(entropy(rho1) - std::log2(double(d))));
    const SpinOps ops = spin_operators(two_s);
    const Dense sz2 = ops.sz * ops.sz;
    const double fluct = std::real((rho1.rho.to_dense() * sz2).trace());
    dz = std::max(dz, std::abs(fluct - s * (s + 1) / 3.0));
  }
  out.push_back(check("A12.negativity", "uniform-Schmidt pair: N = s", 0.0, dn, 1e-12));
  out.push_back(check("A12.entropy", "uniform-Schmidt pair: S = log2(2s+1)", 0.0, ds, 1e-12));
  out.push_back(check("A12.fluctuation", "uniform-Schmidt pair: <Sz^2> = s(s+1)/3", 0.0, dz,
                      1e-12));
  return out;
}

inline std::vector<CriterionResult> acceptance_a13(int threads) {
  using namespace verify_detail;
  std::vector<CriterionResult> out;
  ModelParams p = pair_params(3, 0.75, 0.0, 0.01);  // s = 3/2
  p.n_pairs = 3;                                    // 2n = 6
  const double bs = factorizing_field(p).b_s;

  // GMF dimerized intervals below B_s: where alpha < alpha_c(B)
  auto excess = [&](double b) { return critical_alpha(p, b) - p.alpha; };
  const int nb = 200;
  std::vector<double> ac(nb);
  for (int i = 0; i < nb; ++i) ac[i] = excess(bs * i / (nb - 1));
  std::vector<double> edges;
  for (int i = 0; i + 1 < nb; ++i) {
    if ((ac[i] > 0) != (ac[i + 1] > 0)) {
      double lo = bs * i / (nb - 1), hi = bs * (i + 1) / (nb - 1);
      double flo = ac[i];
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        if ((excess(mid) > 0) == (flo > 0))
          lo = mid;
        else
          hi = mid;
      }
      edges.push_back(0.5 * (lo + hi));
    }
  }
  out.push_back(check("A13.interval-edges", "GMF dimerized interval edges below B_s", 5.0,
                      static_cast<double>(edges.size()), 0.0));
  if (edges.size() != 5) return out;
  const std::vector<std::pair<double, double>> intervals = {
      {0.0, edges[0]}, {edges[1], edges[2]}, {edges[3], edges[4]}};

  std::vector<double> grid(60);
  for (int i = 0; i < 60; ++i) grid[i] = 0.6 * p.jx_scale() * i / 59.0;
  const auto records = field_scan(p, grid, threads);

  int n12_plateaus = 0, m_plateaus = 0;
  std::vector<double> plateau_min, m_means;
  for (const auto& [lo, hi] : intervals) {
    double n_min = 1e300, n_max = -1e300, m_min = 1e300, m_max = -1e300, m_sum = 0.0;
    int count = 0;
    for (const ScanRecord& r : records) {
      if (r.b < lo || r.b > hi) continue;
      n_min = std::min(n_min, r.n12);
      n_max = std::max(n_max, r.n12);
      m_min = std::min(m_min, r.m);
      m_max = std::max(m_max, r.m);
      m_sum += r.m;
      ++count;
    }
    if (count >= 2 && n_max - n_min < 0.05) ++n12_plateaus;
    if (count >= 2 && m_max - m_min < 0.1) ++m_plateaus;
    plateau_min.push_back(n_min);
    m_means.push_back(count > 0 ? m_sum / count : 0.0);
  }
  out.push_back(check("A13.n12-plateaus", "N12 plateaus over GMF dimerized intervals", 3.0,
                      static_cast<double>(n12_plateaus), 0.0));

  int valleys = 0;
  for (int i = 0; i < 2; ++i) {
    double v_min = 1e300;
    for (const ScanRecord& r : records)
      if (r.b > intervals[i].second && r.b < intervals[i + 1].first)
        v_min = std::min(v_min, r.n12);
    if (v_min < plateau_min[i] && v_min < plateau_min[i + 1]) ++valleys;
  }
  out.push_back(check("A13.valleys", "local N12 minima between plateaus", 2.0,
                      static_cast<double>(valleys), 0.0));

  bool m_separated = true;
  for (int i = 0; i + 1 < 3; ++i)
    if (std::abs(m_means[i + 1] - m_means[i]) < 0.25) m_separated = false;
  out.push_back(check("A13.m-plateaus", "2s = 3 approximate magnetization plateaus", 3.0,
                      m_separated ? static_cast<double>(m_plateaus) : 0.0, 0.0));
  return out;
}

/// Run the full acceptance suite. Every tolerance is pinned here.
inline std::vector<CriterionResult> run_acceptance(int threads = 0) {
  if (threads <= 0) threads = hardware_threads();
  std::vector<CriterionResult> all;
  auto append = [&all](std::vector<CriterionResult> part) {
    for (auto& r : part) all.push_back(std::move(r));
  };
  append(acceptance_a1_a2());
  append(acceptance_a3());
  append(acceptance_a4());
  append(acceptance_a5(threads));
  append(acceptance_a6_a7(threads));
  append(acceptance_a8());
  append(acceptance_a9(threads));
  append(acceptance_a10_a11());
  append(acceptance_a12());
  append(acceptance_a13(threads));
  return all;
}

}  // namespace dimerlab
