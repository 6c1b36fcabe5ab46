#pragma once

#include <cmath>

namespace formopt {

/// Scale-aware thresholds. Each field is a relative coefficient; the absolute
/// threshold at a point is derived from the local gradient or Hessian size so
/// that rescaling f does not change any decision.
struct ToleranceSet {
  double fonc_rel = 1e-8;   // fonc_tol = fonc_rel * (1 + |grad f|)
  double eig_rel = 1e-7;    // eig_tol  = eig_rel  * (1 + max|H_ij|)
  double det_rel = 1e-8;    // det_tol  = det_rel  * (1 + max|H_ij|)^n
  double unit_tol = 1e-12;  // | |x| - 1 | accepted as on-sphere

  double fonc_tol(double grad_norm) const { return fonc_rel * (1.0 + grad_norm); }
  double eig_tol(double hess_max) const { return eig_rel * (1.0 + hess_max); }
  double det_tol(double hess_max, int n) const { return det_rel * std::pow(1.0 + hess_max, n); }
};

}  // namespace formopt
