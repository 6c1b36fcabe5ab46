#pragma once

// Multistart enumeration of first-order critical points of a form on the
// unit sphere: projected-gradient descent for minima (of f and of -f), plain
// Newton on the Lagrange system for everything else, deduplication, then
// certification of each representative.

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <thread>
#include <vector>

#include "formopt/certify.hpp"
#include "formopt/error.hpp"
#include "formopt/form.hpp"
#include "formopt/tolerance.hpp"

namespace formopt {

struct SearchConfig {
  int starts = 0;  // 0 selects 200 * n
  std::uint64_t seed = 0;
  int max_iters = 2000;        // descent iterations per start
  int newton_max_iters = 100;
  double armijo_c = 1e-4;
  double backtrack = 0.5;
  double min_step = 1e-30;
  double dedup_tol = 1e-6;
  bool identify_antipodal = true;  // only honoured for even d
  int threads = 0;                 // 0 selects hardware concurrency
  ToleranceSet tols;

  int resolved_starts(int n) const { return starts > 0 ? starts : 200 * n; }

  void validate() const {
    if (starts < 0) throw Error(ErrorCode::InvalidArgument, "starts must be >= 1");
    if (!(dedup_tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "dedup_tol must be > 0");
    if (max_iters < 0 || newton_max_iters < 1) throw Error(ErrorCode::InvalidArgument, "iteration limits must be positive");
    if (!(backtrack > 0.0 && backtrack < 1.0)) throw Error(ErrorCode::InvalidArgument, "backtrack factor must lie in (0,1)");
    if (threads < 0) throw Error(ErrorCode::InvalidArgument, "threads must be >= 0");
  }
};

enum class DescentStatus { Converged, MaxIters, NoDescent };

inline constexpr std::string_view to_string(DescentStatus s) {
  switch (s) {
    case DescentStatus::Converged: return "CONVERGED";
    case DescentStatus::MaxIters: return "MAX_ITERS";
    case DescentStatus::NoDescent: return "NO_DESCENT";
  }
  return "UNKNOWN";
}

struct DescentResult {
  UnitPoint point;
  DescentStatus status = DescentStatus::MaxIters;
  int iterations = 0;
  std::vector<double> accepted_values;  // f at x0 and after every accepted step
};

/// Riemannian gradient descent with renormalization as retraction. The
/// search direction is -(grad f - d f x), the tangent projection of grad f.
inline DescentResult descend(const Form& f, const UnitPoint& x0, const SearchConfig& cfg = {}) {
  require_dim(static_cast<std::size_t>(x0.dim()), static_cast<std::size_t>(f.n()), "descend");
  const int d = f.d();
  DescentResult out{.point = x0, .accepted_values = {}};
  Vector x = x0.coords();
  double fx = eval(f, x);
  out.accepted_values.push_back(fx);
  double step = -1.0;

  for (int it = 0; it < cfg.max_iters; ++it) {
    const Vector g = gradient(f, x);
    const Vector r = g - d * fx * x;
    const double rr = r.squaredNorm();
    if (std::sqrt(rr) <= cfg.tols.fonc_tol(g.norm())) {
      out.status = DescentStatus::Converged;
      return out;
    }
    if (step < 0.0) step = 1.0 / (1.0 + d * g.norm());
    bool accepted = false;
    while (step >= cfg.min_step) {
      Vector trial = x - step * r;
      trial /= trial.norm();
      const double ft = eval(f, trial);
      if (ft <= fx - cfg.armijo_c * step * rr) {
        x = std::move(trial);
        fx = ft;
        accepted = true;
        break;
      }
      step *= cfg.backtrack;
    }
    out.iterations = it + 1;
    if (!accepted) {
      out.status = DescentStatus::NoDescent;
      return out;
    }
    out.point = UnitPoint::normalized(x);
    out.accepted_values.push_back(fx);
    step /= cfg.backtrack;
  }
  const Vector g = gradient(f, x);
  out.status = (g - d * fx * x).norm() <= cfg.tols.fonc_tol(g.norm()) ? DescentStatus::Converged
                                                                      : DescentStatus::MaxIters;
  return out;
}

enum class NewtonStatus { Converged, SingularJacobian, NotConverged };

inline constexpr std::string_view to_string(NewtonStatus s) {
  switch (s) {
    case NewtonStatus::Converged: return "CONVERGED";
    case NewtonStatus::SingularJacobian: return "SINGULAR_JACOBIAN";
    case NewtonStatus::NotConverged: return "NOT_CONVERGED";
  }
  return "UNKNOWN";
}

struct NewtonResult {
  UnitPoint point;
  bool converged = false;
  NewtonStatus status = NewtonStatus::NotConverged;
  int iterations = 0;
};

/// Residual required of a Newton-refined point.
inline double newton_target(double grad_norm) { return 1e-12 * (1.0 + grad_norm); }

/// Newton on F(x, mu) = (grad f(x) - 2 mu x, |x|^2 - 1) starting from
/// mu = d f(x)/2, with x renormalized after every step. On failure the input
/// point is returned with converged = false.
///
/// Once the residual target is met, iteration continues while each step at
/// least halves the residual. Near a degenerate root convergence is only
/// linear and the first point under the target can sit far from the root.
inline NewtonResult newton_refine(const Form& f, const UnitPoint& x0, int max_iters = 100) {
  require_dim(static_cast<std::size_t>(x0.dim()), static_cast<std::size_t>(f.n()), "newton_refine");
  const int n = f.n();
  const int d = f.d();
  NewtonResult fail{.point = x0};

  Vector x = x0.coords();
  double mu = d * eval(f, x) / 2.0;
  bool reached = false;
  NewtonResult best{.point = x0, .converged = true, .status = NewtonStatus::Converged};
  double best_r = std::numeric_limits<double>::infinity();
  double prev_r = std::numeric_limits<double>::infinity();
  for (int it = 0; it <= max_iters; ++it) {
    const Vector g = gradient(f, x);
    const double fx = eval(f, x);
    const double r = (g - d * fx * x).norm();
    if (reached || r <= newton_target(g.norm())) {
      if (reached && !(r < 0.5 * prev_r)) return best;
      reached = true;
      if (r < best_r) {
        // The input itself is kept untouched so that Newton is a fixed point.
        best.point = it == 0 ? x0 : UnitPoint::normalized(x);
        best.iterations = it;
        best_r = r;
      }
    }
    prev_r = r;
    if (it == max_iters) break;

    Vector rhs(n + 1);
    rhs.head(n) = -(g - 2.0 * mu * x);
    rhs[n] = -(x.squaredNorm() - 1.0);
    Matrix jac = Matrix::Zero(n + 1, n + 1);
    jac.topLeftCorner(n, n) = hessian(f, x).dense() - 2.0 * mu * Matrix::Identity(n, n);
    jac.block(0, n, n, 1) = -2.0 * x;
    jac.block(n, 0, 1, n) = 2.0 * x.transpose();

    Eigen::FullPivLU<Matrix> lu(jac);
    lu.setThreshold(1e-13);
    const Vector delta = lu.isInvertible() ? Vector(lu.solve(rhs)) : Vector();
    if (delta.size() == 0 || !delta.allFinite()) {
      if (reached) return best;
      fail.status = NewtonStatus::SingularJacobian;
      fail.iterations = it;
      return fail;
    }
    x += delta.head(n);
    mu += delta[n];
    const double norm = x.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) break;
    x /= norm;
  }
  if (reached) return best;
  fail.iterations = max_iters;
  return fail;
}

struct CriticalPoint {
  UnitPoint point;
  Certificate cert;
  int hits = 1;
  bool refined = false;
};

struct SearchStats {
  int starts = 0;
  int newton_starts = 0;
  int descent_starts = 0;
  int failed_starts = 0;
  int unrefined_candidates = 0;
  int no_descent = 0;
};

struct SearchResult {
  std::vector<CriticalPoint> points;
  SearchStats stats;
};

namespace detail {

struct Candidate {
  UnitPoint point;
  bool refined = false;
};

struct StartOutcome {
  std::optional<Candidate> candidate;
  bool newton_start = false;
  bool no_descent = false;
};

inline UnitPoint random_sphere_point(int n, std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(n);
  do {
    for (int i = 0; i < n; ++i) v[i] = normal(rng);
  } while (v.norm() == 0.0);
  return UnitPoint::normalized(std::move(v));
}

// Start i: even -> Newton directly; i % 4 == 1 -> descend f; i % 4 == 3 ->
// descend -f (finds maxima of f). Descent ends are handed to Newton.
inline StartOutcome run_start(const Form& f, const Form& neg_f, const SearchConfig& cfg, int index) {
  StartOutcome out;
  const UnitPoint x0 = random_sphere_point(f.n(), cfg.seed, static_cast<std::uint64_t>(index));
  if (index % 2 == 0) {
    out.newton_start = true;
    const NewtonResult nr = newton_refine(f, x0, cfg.newton_max_iters);
    if (nr.converged) out.candidate = Candidate{nr.point, true};
    else if (fonc_residual(f, x0) <= cfg.tols.fonc_tol(gradient(f, x0.coords()).norm()))
      out.candidate = Candidate{x0, false};
    return out;
  }
  const DescentResult dr = descend(index % 4 == 1 ? f : neg_f, x0, cfg);
  out.no_descent = dr.status == DescentStatus::NoDescent;
  const NewtonResult nr = newton_refine(f, dr.point, cfg.newton_max_iters);
  if (nr.converged) {
    out.candidate = Candidate{nr.point, true};
  } else {
    const Vector g = gradient(f, dr.point.coords());
    if (fonc_residual(f, dr.point) <= cfg.tols.fonc_tol(g.norm())) out.candidate = Candidate{dr.point, false};
  }
  return out;
}

inline UnitPoint canonical_sign(const UnitPoint& p) {
  for (int i = 0; i < p.dim(); ++i) {
    if (std::abs(p[i]) > 1e-9) return p[i] > 0.0 ? p : p.antipode();
  }
  return p;
}

}  // namespace detail

/// Deterministic in cfg.seed: every start owns an RNG stream derived from
/// (seed, start index) and results are reduced in start order, so the output
/// does not depend on the number of threads.
inline SearchResult find_critical(const Form& f, const SearchConfig& cfg = {}) {
  cfg.validate();
  const int starts = cfg.resolved_starts(f.n());
  const Form neg_f = -f;
  std::vector<detail::StartOutcome> outcomes(static_cast<std::size_t>(starts));

  int threads = cfg.threads > 0 ? cfg.threads : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, starts);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < starts; i = next++) outcomes[static_cast<std::size_t>(i)] = detail::run_start(f, neg_f, cfg, i);
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  SearchResult result;
  result.stats.starts = starts;
  const bool merge_antipodes = cfg.identify_antipodal && f.d() % 2 == 0;
  std::vector<CriticalPoint> reps;
  for (const auto& o : outcomes) {
    (o.newton_start ? result.stats.newton_starts : result.stats.descent_starts)++;
    if (o.no_descent) result.stats.no_descent++;
    if (!o.candidate) {
      result.stats.failed_starts++;
      continue;
    }
    const Vector& p = o.candidate->point.coords();
    auto same = [&](const CriticalPoint& r) {
      const Vector& q = r.point.coords();
      return (p - q).norm() <= cfg.dedup_tol || (merge_antipodes && (p + q).norm() <= cfg.dedup_tol);
    };
    auto it = std::find_if(reps.begin(), reps.end(), same);
    if (it != reps.end()) {
      it->hits++;
      continue;
    }
    if (!o.candidate->refined) result.stats.unrefined_candidates++;
    UnitPoint rep = merge_antipodes ? detail::canonical_sign(o.candidate->point) : o.candidate->point;
    reps.push_back(CriticalPoint{rep, Certificate{.point = rep}, 1, o.candidate->refined});
  }

  for (auto& r : reps) r.cert = certify_point(f, r.point, cfg.tols);
  std::stable_sort(reps.begin(), reps.end(), [](const CriticalPoint& a, const CriticalPoint& b) {
    if (a.cert.f_val != b.cert.f_val) return a.cert.f_val < b.cert.f_val;
    const Vector& pa = a.point.coords();
    const Vector& pb = b.point.coords();
    return std::lexicographical_compare(pa.data(), pa.data() + pa.size(), pb.data(), pb.data() + pb.size());
  });
  result.points = std::move(reps);
  return result;
}

}  // namespace formopt
