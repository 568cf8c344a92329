#pragma once

namespace fom {

// Central numeric tolerances. Certificate residuals absorb floating-point
// accumulation over long runs; identities are checked near machine precision.
struct Tolerances {
  double residual_abs = 1e-9;   // absolute slack for inequality certificates
  double residual_rel = 1e-9;   // relative slack, scaled by the magnitude of min psi
  double identity = 1e-12;      // algebraic identities (Bregman decomposition etc.)
  double feasibility = 1e-10;   // constraint violation allowed for iterates

  double relation_slack(double scale) const {
    double s = scale < 0 ? -scale : scale;
    return residual_abs + residual_rel * s;
  }
};

inline const Tolerances& default_tolerances() {
  static const Tolerances tols{};
  return tols;
}

}  // namespace fom
