#pragma once

#include <cstddef>

namespace dimerlab {

/// Central numeric tolerances and resource caps. All modules take a
/// NumericPolicy (defaulted) instead of hardcoding thresholds.
struct NumericPolicy {
  double assembly_tol = 1e-12;     ///< Hermiticity / algebra identities
  double eig_residual_tol = 1e-9;  ///< iterative eigensolver ||Mv - lv||
  double psd_slack = 1e-10;        ///< eigenvalue >= -psd_slack counts as PSD
  double trace_tol = 1e-10;        ///< density-matrix trace deviation
  double fixed_point_tol = 1e-10;  ///< self-consistency |dx| stop
  int max_fixed_point_iters = 5000;
  int max_lanczos_dim = 400;       ///< Krylov dimension per restart
  int max_lanczos_restarts = 12;
  double degeneracy_tol = 1e-9;    ///< level-crossing / tie detection (units of J_x)
  double phase_threshold = 1e-6;   ///< |<Sx>| below this is a dimerized phase
  double negativity_cutoff = 1e-12;
  std::size_t dense_cap = 8192;       ///< largest dimension for dense eig
  std::size_t dim_cap = 2'000'000;    ///< largest sparse operator dimension
};

inline const NumericPolicy& default_policy() {
  static const NumericPolicy policy{};
  return policy;
}

}  // namespace dimerlab
