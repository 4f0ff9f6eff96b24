#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace dimerlab {

enum class Boundary { Cyclic, Open };

/// Couplings and geometry of the dimerized XY chain in the canonical gauge
/// J_x > 0, |J_y| <= J_x (chi = J_y/J_x), 0 <= alpha <= 1, B >= 0.
struct ModelParams {
  int two_s = 2;        ///< twice the spin
  double jx = 1.0;      ///< energy unit
  double chi = 0.75;    ///< J_y / J_x, in [-1, 1]
  double alpha = 0.0;   ///< inter-pair coupling strength, in [0, 1]
  double b = 0.0;       ///< transverse field, >= 0
  int n_pairs = 4;      ///< chain has 2*n_pairs sites
  Boundary boundary = Boundary::Cyclic;

  double spin() const { return 0.5 * two_s; }
  int site_dim() const { return two_s + 1; }
  int n_sites() const { return 2 * n_pairs; }
  double jy() const { return chi * jx; }
  /// Field scale j_x = 2 J_x s used on every figure axis.
  double jx_scale() const { return 2.0 * jx * spin(); }
  /// Conventional mean-field critical field B_c^mf = J_x s (1 + alpha).
  double b_c_mf() const { return jx * spin() * (1.0 + alpha); }

  void validate() const {
    if (two_s < 1) throw std::invalid_argument("ModelParams: two_s must be >= 1");
    if (!(jx > 0.0)) throw std::invalid_argument("ModelParams: jx must be > 0");
    if (std::abs(chi) > 1.0 + 1e-15)
      throw std::invalid_argument("ModelParams: |chi| must be <= 1 (canonical gauge)");
    if (alpha < 0.0 || alpha > 1.0)
      throw std::invalid_argument("ModelParams: alpha must be in [0, 1] (canonical gauge)");
    if (b < 0.0) throw std::invalid_argument("ModelParams: b must be >= 0 (canonical gauge)");
    if (n_pairs < 1) throw std::invalid_argument("ModelParams: n_pairs must be >= 1");
  }
};

inline const char* boundary_name(Boundary b) {
  return b == Boundary::Cyclic ? "cyclic" : "open";
}

inline Boundary boundary_from_name(const std::string& name) {
  if (name == "cyclic") return Boundary::Cyclic;
  if (name == "open") return Boundary::Open;
  throw std::invalid_argument("boundary must be 'cyclic' or 'open', got '" + name + "'");
}

}  // namespace dimerlab
