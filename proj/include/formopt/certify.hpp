#pragma once

// Point-level optimality tests for a form restricted to the unit sphere.
//
// At a point x on the sphere, x satisfies the first-order condition iff
// grad f(x) = d f(x) x (equivalently |grad f| = d|f|), with multiplier
// lambda* = -d f(x)/2. The second-order necessary condition then reduces to
// an inspection of the two smallest Hessian eigenvalues: lambda_1 >= d f if
// f >= 0, lambda_2 >= d f if f < 0 (for d > 2). Strictness is decided by the
// bordered determinant D(x) = det[[H - d f I, x], [x^T, 0]].

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <string>
#include <string_view>
#include <utility>

#include "formopt/error.hpp"
#include "formopt/form.hpp"
#include "formopt/tolerance.hpp"

namespace formopt {

enum class Classification { LocalMin, StrictLocalMin, NotFONC, FONCNotSONC, DegenerateSONC };

inline constexpr std::string_view to_string(Classification c) {
  switch (c) {
    case Classification::LocalMin: return "LocalMin";
    case Classification::StrictLocalMin: return "StrictLocalMin";
    case Classification::NotFONC: return "NotFONC";
    case Classification::FONCNotSONC: return "FONCNotSONC";
    case Classification::DegenerateSONC: return "DegenerateSONC";
  }
  return "Unknown";
}

inline Classification classification_from_string(std::string_view s) {
  for (auto c : {Classification::LocalMin, Classification::StrictLocalMin, Classification::NotFONC,
                 Classification::FONCNotSONC, Classification::DegenerateSONC}) {
    if (to_string(c) == s) return c;
  }
  throw Error(ErrorCode::MalformedInput, "unknown classification '" + std::string(s) + "'");
}

inline bool is_local_min(Classification c) {
  return c == Classification::LocalMin || c == Classification::StrictLocalMin;
}

struct Certificate {
  UnitPoint point;
  double f_val = 0.0;
  double grad_norm = 0.0;
  double fonc_residual = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double tau = 0.0;
  double det_bordered = 0.0;
  double multiplier = 0.0;
  Classification classification = Classification::NotFONC;
  bool f_near_zero_flag = false;

  // Absolute thresholds that were in force at this point.
  double fonc_tol = 0.0;
  double eig_tol = 0.0;
  double det_tol = 0.0;
};

inline double fonc_residual(const Form& f, const UnitPoint& x) {
  require_dim(static_cast<std::size_t>(x.dim()), static_cast<std::size_t>(f.n()), "fonc_residual");
  const Vector& p = x.coords();
  return (gradient(f, p) - f.d() * eval(f, p) * p).norm();
}

/// Orthonormal basis of the tangent space x^perp: columns 2..n of the
/// Householder reflector that maps e1 onto +-x.
inline Matrix tangent_basis(const UnitPoint& x) {
  const int n = x.dim();
  if (n < 2) throw Error(ErrorCode::EmptyTangent, "tangent space of S^0 is empty");
  Vector v = x.coords();
  // Reflect e1 to -sign(x1) x; adding keeps v away from cancellation.
  v[0] += (v[0] >= 0.0 ? 1.0 : -1.0);
  const double vv = v.squaredNorm();
  Matrix reflector = Matrix::Identity(n, n) - (2.0 / vv) * v * v.transpose();
  return reflector.rightCols(n - 1);
}

inline double tangent_tau(const Form& f, const UnitPoint& x) {
  require_dim(static_cast<std::size_t>(x.dim()), static_cast<std::size_t>(f.n()), "tangent_tau");
  const Matrix u = tangent_basis(x);
  const Matrix restricted = u.transpose() * hessian(f, x.coords()).dense() * u;
  Eigen::SelfAdjointEigenSolver<Matrix> es(restricted, Eigen::EigenvaluesOnly);
  return es.eigenvalues()[0];
}

/// Two smallest Hessian eigenvalues. For n = 1 the second is +infinity.
inline std::pair<double, double> lambda_pair(const SymMatrix& h) {
  if (h.order() == 1) return {h(0, 0), std::numeric_limits<double>::infinity()};
  Eigen::SelfAdjointEigenSolver<Matrix> es(h.dense(), Eigen::EigenvaluesOnly);
  return {es.eigenvalues()[0], es.eigenvalues()[1]};
}

inline std::pair<double, double> lambda_pair(const Form& f, const UnitPoint& x) {
  require_dim(static_cast<std::size_t>(x.dim()), static_cast<std::size_t>(f.n()), "lambda_pair");
  return lambda_pair(hessian(f, x.coords()));
}

inline double bordered_det(const Form& f, const UnitPoint& x) {
  require_dim(static_cast<std::size_t>(x.dim()), static_cast<std::size_t>(f.n()), "bordered_det");
  const int n = f.n();
  const Vector& p = x.coords();
  Matrix m = Matrix::Zero(n + 1, n + 1);
  m.topLeftCorner(n, n) = hessian(f, p).dense() - f.d() * eval(f, p) * Matrix::Identity(n, n);
  m.block(0, n, n, 1) = p;
  m.block(n, 0, 1, n) = p.transpose();
  return m.fullPivLu().determinant();
}

/// Outcome of the eigenvalue form of the second-order necessary condition.
struct SoncDetail {
  bool holds = false;
  bool negative_branch = false;  // f(x) < 0 and d > 2: lambda_2 is tested
  double margin = 0.0;           // tested eigenvalue minus d f(x)
  // On the negative branch, a passing point must also have
  // lambda_1 = d(d-1) f(x); false flags a numerical inconsistency.
  bool lambda1_consistent = true;
};

inline SoncDetail sonc_detail(int n, int d, double fx, double lambda1, double lambda2, double eig_tol) {
  SoncDetail out;
  if (n == 1) {
    // S^0 is discrete: every point is isolated, the condition is vacuous.
    out.holds = true;
    out.margin = std::numeric_limits<double>::infinity();
    return out;
  }
  const double target = d * fx;
  // For d <= 2, d(d-1) f >= d f when f < 0, so lambda_2 no longer isolates the
  // tangent spectrum and the lambda_1 test applies on both signs.
  if (fx >= 0.0 || d <= 2) {
    out.margin = lambda1 - target;
  } else {
    out.negative_branch = true;
    out.margin = lambda2 - target;
  }
  out.holds = out.margin >= -eig_tol;
  if (out.negative_branch && out.holds) {
    out.lambda1_consistent = std::abs(lambda1 - d * (d - 1) * fx) <= eig_tol * (1.0 + std::abs(fx));
  }
  return out;
}

inline bool sonc_check(const Form& f, const UnitPoint& x, const ToleranceSet& tols = {}) {
  require_dim(static_cast<std::size_t>(x.dim()), static_cast<std::size_t>(f.n()), "sonc_check");
  const Vector& p = x.coords();
  const Vector g = gradient(f, p);
  const double fx = eval(f, p);
  const double residual = (g - f.d() * fx * p).norm();
  if (residual > tols.fonc_tol(g.norm())) {
    throw Error(ErrorCode::PreconditionNotFonc,
                "second-order test requested at a point with FONC residual " + std::to_string(residual));
  }
  const SymMatrix h = hessian(f, p);
  const auto [l1, l2] = lambda_pair(h);
  return sonc_detail(f.n(), f.d(), fx, l1, l2, tols.eig_tol(h.max_abs())).holds;
}

inline Certificate certify_point(const Form& f, const UnitPoint& x, const ToleranceSet& tols = {}) {
  require_dim(static_cast<std::size_t>(x.dim()), static_cast<std::size_t>(f.n()), "certify_point");
  const int n = f.n();
  const int d = f.d();
  const Vector& p = x.coords();
  const Vector g = gradient(f, p);
  const double fx = eval(f, p);
  const SymMatrix h = hessian(f, p);
  const double hmax = h.max_abs();

  Certificate cert{.point = x};
  cert.f_val = fx;
  cert.grad_norm = g.norm();
  cert.fonc_residual = (g - d * fx * p).norm();
  std::tie(cert.lambda1, cert.lambda2) = lambda_pair(h);
  cert.tau = n >= 2 ? tangent_tau(f, x) : std::numeric_limits<double>::infinity();
  cert.det_bordered = bordered_det(f, x);
  cert.multiplier = -d * fx / 2.0;
  cert.fonc_tol = tols.fonc_tol(cert.grad_norm);
  cert.eig_tol = tols.eig_tol(hmax);
  cert.det_tol = tols.det_tol(hmax, n);
  cert.f_near_zero_flag = std::abs(fx) <= cert.eig_tol;

  if (cert.fonc_residual > cert.fonc_tol) {
    cert.classification = Classification::NotFONC;
    return cert;
  }
  const SoncDetail sonc = sonc_detail(n, d, fx, cert.lambda1, cert.lambda2, cert.eig_tol);
  if (!sonc.holds) {
    cert.classification = Classification::FONCNotSONC;
  } else if (std::abs(cert.det_bordered) > cert.det_tol) {
    cert.classification = Classification::StrictLocalMin;
  } else if (sonc.margin <= cert.eig_tol) {
    cert.classification = Classification::DegenerateSONC;
  } else {
    // Only valid for generic forms: relies on FONC + SONC implying a minimizer.
    cert.classification = Classification::LocalMin;
  }
  return cert;
}

}  // namespace formopt
